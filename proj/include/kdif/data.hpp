#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

// Binary response data: CSV ingestion, the standardized-total-score matching
// criterion, and the reference/focal partition.

namespace kdif {

// Row-major binary response matrix with one group label per respondent.
// group[p] == 0 marks the reference group, 1 the focal group.
struct ResponseMatrix {
    std::size_t n = 0;
    std::size_t items = 0;
    std::vector<std::uint8_t> y;  // n * items
    std::vector<std::uint8_t> group;
    std::vector<std::string> item_names;
    std::string reference_label;
    std::string focal_label;

    [[nodiscard]] std::uint8_t at(std::size_t p, std::size_t i) const { return y[p * items + i]; }

    [[nodiscard]] std::size_t group_size(int g) const {
        std::size_t count = 0;
        for (const auto v : group) count += (v == g);
        return count;
    }

    // Item responses as doubles, in respondent order.
    [[nodiscard]] std::vector<double> item_column(std::size_t i) const {
        std::vector<double> out(n);
        for (std::size_t p = 0; p < n; ++p) out[p] = static_cast<double>(at(p, i));
        return out;
    }
};

// Matching-criterion values split by group. idx0/idx1 map back to respondent
// rows; theta0/theta1 are aligned with them. The concatenation of theta0 and
// theta1 is always a permutation of the input scores.
struct GroupedScores {
    std::vector<double> theta0, theta1;
    std::vector<std::size_t> idx0, idx1;
    double lambda_hat = 0.0;  // n0 / (n0 + n1)

    [[nodiscard]] std::size_t n0() const { return theta0.size(); }
    [[nodiscard]] std::size_t n1() const { return theta1.size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        const auto first = f.find_first_not_of(" \t");
        const auto last = f.find_last_not_of(" \t");
        f = (first == std::string::npos) ? std::string{} : f.substr(first, last - first + 1);
    }
    return fields;
}

}  // namespace detail

// Load a header-ed CSV whose columns are binary items plus one group column.
// When reference_label is empty the larger group becomes the reference (ties
// broken by first appearance in the file). Row order is preserved.
inline ResponseMatrix load_response_csv(const std::string& path, const std::string& group_col,
                                        const std::string& reference_label = "") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const auto header = detail::split_csv_line(line);

    std::size_t group_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == group_col) group_idx = i;
    }
    if (group_idx == header.size()) {
        throw std::runtime_error(path + ": group column '" + group_col + "' not found");
    }

    ResponseMatrix rm;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != group_idx) rm.item_names.push_back(header[i]);
    }
    rm.items = rm.item_names.size();
    if (rm.items == 0) throw std::runtime_error(path + ": no item columns");

    std::vector<std::string> row_labels;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::runtime_error(path + ": row " + std::to_string(row_no) +
                                     " has " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(header.size()));
        }
        std::size_t col = 0;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i == group_idx) {
                row_labels.push_back(fields[i]);
                continue;
            }
            const std::string& cell = fields[i];
            if (cell != "0" && cell != "1") {
                throw std::runtime_error(path + ": non-binary cell '" + cell + "' at row " +
                                         std::to_string(row_no) + ", column '" +
                                         rm.item_names[col] + "'");
            }
            rm.y.push_back(cell == "1" ? 1 : 0);
            ++col;
        }
    }
    rm.n = row_labels.size();
    if (rm.n == 0) throw std::runtime_error(path + ": no data rows");

    // Label census in first-appearance order.
    std::vector<std::pair<std::string, std::size_t>> census;
    for (const auto& lab : row_labels) {
        auto it = std::find_if(census.begin(), census.end(),
                               [&](const auto& kv) { return kv.first == lab; });
        if (it == census.end()) {
            census.emplace_back(lab, 1);
        } else {
            ++it->second;
        }
    }
    if (census.size() != 2) {
        throw std::runtime_error(path + ": group column must contain exactly 2 labels, found " +
                                 std::to_string(census.size()));
    }

    std::string ref = reference_label;
    if (ref.empty()) {
        ref = (census[1].second > census[0].second) ? census[1].first : census[0].first;
    } else if (ref != census[0].first && ref != census[1].first) {
        throw std::runtime_error(path + ": reference label '" + ref + "' not present in column '" +
                                 group_col + "'");
    }
    rm.reference_label = ref;
    rm.focal_label = (census[0].first == ref) ? census[1].first : census[0].first;

    rm.group.resize(rm.n);
    for (std::size_t p = 0; p < rm.n; ++p) {
        rm.group[p] = (row_labels[p] == ref) ? 0 : 1;
    }
    if (rm.group_size(0) == 0 || rm.group_size(1) == 0) {
        throw std::runtime_error(path + ": one of the groups is empty");
    }
    return rm;
}

// Total score over all items, standardized over the pooled sample to mean 0
// and sample standard deviation 1 (n-1 divisor). The studied item is always
// included in the total.
[[nodiscard]] inline std::vector<double> standardized_total_score(const ResponseMatrix& rm) {
    if (rm.n < 2) throw std::invalid_argument("standardized_total_score: need at least 2 rows");
    std::vector<double> totals(rm.n, 0.0);
    for (std::size_t p = 0; p < rm.n; ++p) {
        double t = 0.0;
        for (std::size_t i = 0; i < rm.items; ++i) t += rm.at(p, i);
        totals[p] = t;
    }
    double mean = 0.0;
    for (const double t : totals) mean += t;
    mean /= static_cast<double>(rm.n);
    double ss = 0.0;
    for (const double t : totals) ss += (t - mean) * (t - mean);
    const double sd = std::sqrt(ss / static_cast<double>(rm.n - 1));
    if (sd == 0.0) {
        throw std::domain_error("standardized_total_score: total scores have zero variance");
    }
    for (double& t : totals) t = (t - mean) / sd;
    return totals;
}

[[nodiscard]] inline GroupedScores split_groups(const ResponseMatrix& rm,
                                                const std::vector<double>& scores) {
    if (scores.size() != rm.n) throw std::invalid_argument("split_groups: score length mismatch");
    GroupedScores gs;
    for (std::size_t p = 0; p < rm.n; ++p) {
        if (rm.group[p] == 0) {
            gs.theta0.push_back(scores[p]);
            gs.idx0.push_back(p);
        } else {
            gs.theta1.push_back(scores[p]);
            gs.idx1.push_back(p);
        }
    }
    gs.lambda_hat = static_cast<double>(gs.n0()) / static_cast<double>(gs.n0() + gs.n1());
    return gs;
}

}  // namespace kdif
