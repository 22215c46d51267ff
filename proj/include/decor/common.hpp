#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace decor {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Error taxonomy mirrored by the CLI exit codes (2/3/4).
enum class errc { precondition = 2, numeric = 3, io = 4 };

class error : public std::runtime_error {
public:
  error(errc kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  errc kind() const { return kind_; }

private:
  errc kind_;
};

[[noreturn]] inline void fail_pre(const std::string& msg) { throw error(errc::precondition, msg); }
[[noreturn]] inline void fail_num(const std::string& msg) { throw error(errc::numeric, msg); }
[[noreturn]] inline void fail_io(const std::string& msg) { throw error(errc::io, msg); }

inline double sqr(double x) { return x * x; }

} // namespace decor
