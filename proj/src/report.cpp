#include "tfwave/report.hpp"

#include <json.hpp>

#include <ostream>

namespace tfwave {

void ExperimentReport::add(std::string quantity, double lhs, double rhs,
                           std::string parameters) {
    Row r;
    r.quantity = std::move(quantity);
    r.lhs = lhs;
    r.rhs = rhs;
    r.ratio = (rhs != 0.0) ? lhs / rhs : 0.0;
    r.parameters = std::move(parameters);
    rows.push_back(std::move(r));
}

void ExperimentReport::to_csv(std::ostream& os) const {
    os << "quantity,lhs,rhs,ratio,parameters\n";
    for (const auto& r : rows)
        os << r.quantity << "," << r.lhs << "," << r.rhs << "," << r.ratio << ",\""
           << r.parameters << "\"\n";
}

std::string ExperimentReport::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        j.push_back({{"quantity", r.quantity},
                     {"lhs", r.lhs},
                     {"rhs", r.rhs},
                     {"ratio", r.ratio},
                     {"parameters", r.parameters}});
    }
    return j.dump(2);
}

}  // namespace tfwave
