#ifndef MASAR_ERROR_HPP
#define MASAR_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace masar {

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class domain_error : public error {
public:
    using error::error;
};

/// Invalid or inconsistent parameters (config file, step size, pulse spec).
class config_error : public error {
public:
    using error::error;
};

/// Operation requested above the maser oscillation threshold (eta_bar <= -2).
class threshold_error : public domain_error {
public:
    explicit threshold_error(double eta_bar)
        : domain_error("above maser oscillation threshold: eta_bar = " + std::to_string(eta_bar) +
                       " <= -2"),
          eta_bar_(eta_bar) {}

    double eta_bar() const noexcept { return eta_bar_; }

private:
    double eta_bar_;
};

/// A requested power reduction lies below what the receiver can resolve.
class below_floor_error : public domain_error {
public:
    below_floor_error(double requested_db, double floor_db)
        : domain_error("below noise floor: " + std::to_string(requested_db) + " dB < floor " +
                       std::to_string(floor_db) + " dB"),
          floor_db_(floor_db) {}

    double floor_db() const noexcept { return floor_db_; }

private:
    double floor_db_;
};

class numerical_error : public error {
public:
    numerical_error(const std::string& what, double time)
        : error(what + " at t = " + std::to_string(time) + " s"), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

class fit_error : public error {
public:
    fit_error(const std::string& what, double residual, std::vector<double> trace,
              std::vector<std::vector<double>> parameter_trace = {})
        : error(what), residual_(residual), trace_(std::move(trace)), parameter_trace_(std::move(parameter_trace)) {}

    double residual() const noexcept { return residual_; }
    /// Weighted SSE after every iteration.
    const std::vector<double>& trace() const noexcept { return trace_; }
    /// Parameter vector after every iteration.
    const std::vector<std::vector<double>>& parameter_trace() const noexcept { return parameter_trace_; }

private:
    double residual_;
    std::vector<double> trace_;
    std::vector<std::vector<double>> parameter_trace_;
};

}  // namespace masar

#endif
