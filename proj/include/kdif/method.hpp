#pragma once

#include <stdexcept>
#include <string>

// Names of the DIF detection methods exposed by the harness and the CLI.

namespace kdif {

enum class Method { np_fixed, np_optimal_true, np_optimal_boot, np_optimal_asymptotic, logistic };

[[nodiscard]] inline std::string method_name(Method m) {
    switch (m) {
        case Method::np_fixed: return "np_fixed";
        case Method::np_optimal_true: return "np_optimal_true";
        case Method::np_optimal_boot: return "np_optimal_boot";
        case Method::np_optimal_asymptotic: return "np_optimal_asymptotic";
        case Method::logistic: return "logistic";
    }
    throw std::invalid_argument("method_name: unknown method");
}

[[nodiscard]] inline Method parse_method(const std::string& s) {
    if (s == "np_fixed") return Method::np_fixed;
    if (s == "np_optimal_true") return Method::np_optimal_true;
    if (s == "np_optimal_boot") return Method::np_optimal_boot;
    if (s == "np_optimal_asymptotic") return Method::np_optimal_asymptotic;
    if (s == "logistic") return Method::logistic;
    throw std::invalid_argument("unknown method: " + s);
}

}  // namespace kdif
