#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vds {

using Real = double;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = std::vector<double>;

// Error hierarchy. Every failure the library can signal derives from Error so
// callers (the CLI in particular) can map families of errors to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InfiniteCoherenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, ComplexVector last_iterate)
      : Error(what), last_iterate_(std::move(last_iterate)) {}
  const ComplexVector& last_iterate() const noexcept { return last_iterate_; }

 private:
  ComplexVector last_iterate_;
};

// Sorted, duplicate-free set of 0-based indices. All support sets S and block
// id sets in the library use this type.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(std::initializer_list<std::size_t> ids);
  explicit IndexSet(std::vector<std::size_t> ids);

  static IndexSet range(std::size_t first, std::size_t last);  // [first, last)
  static IndexSet full(std::size_t n) { return range(0, n); }

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  bool contains(std::size_t i) const;
  std::size_t max_index() const;  // requires non-empty

  const std::vector<std::size_t>& ids() const noexcept { return ids_; }
  auto begin() const noexcept { return ids_.begin(); }
  auto end() const noexcept { return ids_.end(); }
  std::size_t operator[](std::size_t k) const { return ids_[k]; }

  IndexSet with(std::size_t i) const;
  IndexSet complement(std::size_t n) const;
  IndexSet intersect(const IndexSet& other) const;
  IndexSet unite(const IndexSet& other) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> ids_;
};

}  // namespace vds
