#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hg {

/// Base of every error the library raises. The kind maps onto the CLI
/// exit-code convention (usage 1, data 2, training 3).
class Error : public std::runtime_error {
public:
    enum class Kind { Usage, Data, Training };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }
    int exit_code() const noexcept {
        switch (kind_) {
            case Kind::Usage: return 1;
            case Kind::Data: return 2;
            case Kind::Training: return 3;
        }
        return 2;
    }

private:
    Kind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(Kind::Usage, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(Kind::Data, what) {}
};

class TrainingError : public Error {
public:
    explicit TrainingError(const std::string& what) : Error(Kind::Training, what) {}
};

/// Raised by iterative optimizers that hit their iteration cap.
class ConvergenceError : public TrainingError {
public:
    ConvergenceError(const std::string& what, std::size_t iterations, double residual)
        : TrainingError(what), iterations_(iterations), residual_(residual) {}

    std::size_t iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t iterations_;
    double residual_;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    void append_row(std::span<const double> values);

    /// Copy of the given rows, in the given order.
    Matrix select_rows(std::span<const std::size_t> rows) const;
    /// Copy of the given columns, in the given order.
    Matrix select_cols(std::span<const std::size_t> cols) const;

    const std::vector<double>& data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Binary class labels: 1 = Satisfactory, 0 = NotSatisfactory.
using Labels = std::vector<int>;

/// Sparse vector stored as (index, value) pairs sorted by index.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;

    double get(std::uint32_t index) const;
    void scatter(std::span<double> dense) const;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Hex-encoded SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
/// Hex-encoded SHA-256 of a file's contents; throws DataError if unreadable.
std::string sha256_file(const std::string& path);

/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

/// Writes "warning: ..." to stderr unless warnings are silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

/// Sets the OpenMP worker count (no-op without OpenMP). 0 leaves the default.
void set_worker_count(int workers);
int worker_count();

}  // namespace hg
