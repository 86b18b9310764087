#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tfwave {

// Tabular record of measured quantities against their bounds. Append-only.
struct ExperimentReport {
    struct Row {
        std::string quantity;
        double lhs = 0.0;
        double rhs = 0.0;
        double ratio = 0.0;
        std::string parameters;
    };

    std::vector<Row> rows;

    void add(std::string quantity, double lhs, double rhs, std::string parameters = "");
    void to_csv(std::ostream& os) const;
    std::string to_json() const;
};

}  // namespace tfwave
