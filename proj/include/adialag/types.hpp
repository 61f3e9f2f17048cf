#ifndef ADIALAG_TYPES_HPP
#define ADIALAG_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace adialag {

inline constexpr const char* kVersion = "0.1.0";

using Complex = std::complex<double>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

// Exit codes surfaced by the CLI.
enum ExitCode : int {
    kOk = 0,
    kValidation = 2,
    kNumerical = 3,
    kUnsupported = 4,
};

struct Error : std::runtime_error {
    int exit_code;
    Error(std::string msg, int code) : std::runtime_error(std::move(msg)), exit_code(code) {}
};

struct ValidationError : Error {
    explicit ValidationError(std::string msg) : Error(std::move(msg), kValidation) {}
};

struct NumericalError : Error {
    explicit NumericalError(std::string msg) : Error(std::move(msg), kNumerical) {}
};

struct UnsupportedError : Error {
    explicit UnsupportedError(std::string msg) : Error(std::move(msg), kUnsupported) {}
};

// Level crossing inside the sampled region; carries the point and offending pair.
struct DegeneracyError : NumericalError {
    VecX q;
    int level_a, level_b;
    double gap;
    DegeneracyError(VecX q_, int a, int b, double gap_, const std::string& msg)
        : NumericalError(msg), q(std::move(q_)), level_a(a), level_b(b), gap(gap_) {}
};

// Dense rank-3 array, row-major, sized n^3; K stays small here.
class Tensor3 {
  public:
    Tensor3() : n_(0) {}
    explicit Tensor3(int n) : n_(n), v_(static_cast<size_t>(n) * n * n, 0.0) {}
    int dim() const { return n_; }
    double& operator()(int a, int b, int c) { return v_[idx(a, b, c)]; }
    double operator()(int a, int b, int c) const { return v_[idx(a, b, c)]; }
    void setZero() { std::fill(v_.begin(), v_.end(), 0.0); }

    Tensor3& operator+=(const Tensor3& o) {
        for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    Tensor3& operator-=(const Tensor3& o) {
        for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Tensor3& operator*=(double s) {
        for (double& x : v_) x *= s;
        return *this;
    }
    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
    friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
    friend Tensor3 operator/(Tensor3 a, double s) { return a *= 1.0 / s; }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

  private:
    size_t idx(int a, int b, int c) const {
        return (static_cast<size_t>(a) * n_ + b) * n_ + c;
    }
    int n_;
    std::vector<double> v_;
};

// Dense rank-4 array, same conventions.
class Tensor4 {
  public:
    Tensor4() : n_(0) {}
    explicit Tensor4(int n) : n_(n), v_(static_cast<size_t>(n) * n * n * n, 0.0) {}
    int dim() const { return n_; }
    double& operator()(int a, int b, int c, int d) { return v_[idx(a, b, c, d)]; }
    double operator()(int a, int b, int c, int d) const { return v_[idx(a, b, c, d)]; }

    Tensor4& operator+=(const Tensor4& o) {
        for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    Tensor4& operator-=(const Tensor4& o) {
        for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    Tensor4& operator*=(double s) {
        for (double& x : v_) x *= s;
        return *this;
    }
    friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
    friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
    friend Tensor4 operator*(double s, Tensor4 a) { return a *= s; }
    friend Tensor4 operator/(Tensor4 a, double s) { return a *= 1.0 / s; }

  private:
    size_t idx(int a, int b, int c, int d) const {
        return ((static_cast<size_t>(a) * n_ + b) * n_ + c) * n_ + d;
    }
    int n_;
    std::vector<double> v_;
};

}  // namespace adialag

#endif
