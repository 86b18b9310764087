#pragma once

#include <stdexcept>
#include <string>

namespace tfwave {

struct NotSparse : std::runtime_error {
    explicit NotSparse(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvariantViolation : std::runtime_error {
    explicit InvariantViolation(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateProjection : std::runtime_error {
    explicit DegenerateProjection(const std::string& msg) : std::runtime_error(msg) {}
};

struct RankOutOfRange : std::runtime_error {
    explicit RankOutOfRange(const std::string& msg) : std::runtime_error(msg) {}
};

struct NegativeBlockSize : std::runtime_error {
    explicit NegativeBlockSize(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidFamily : std::runtime_error {
    explicit InvalidFamily(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct TileOutsideDomain : std::runtime_error {
    explicit TileOutsideDomain(const std::string& msg) : std::runtime_error(msg) {}
};

struct MassResidueViolation : std::runtime_error {
    explicit MassResidueViolation(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoDominatingMaximal : std::runtime_error {
    explicit NoDominatingMaximal(const std::string& msg) : std::runtime_error(msg) {}
};

struct HypothesisViolated : std::runtime_error {
    explicit HypothesisViolated(const std::string& msg) : std::runtime_error(msg) {}
};

struct Type1Required : std::runtime_error {
    explicit Type1Required(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyCollection : std::runtime_error {
    explicit EmptyCollection(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tfwave
