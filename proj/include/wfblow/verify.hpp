#pragma once

#include <string>
#include <vector>

#include "wfblow/geometry.hpp"

namespace wfblow {

struct VerifyCase {
  std::string name;
  bool pass;
  double metric;
  double tol;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyCase> cases;

  bool all_pass() const;
  std::string to_json() const;
  void append(const VerifyReport& other);
};

// Machine-checkable suites behind the `verify` CLI command. Each suite is
// deterministic for a fixed seed.
VerifyReport verify_roundtrip(const OrderedPath& path, unsigned seed);
VerifyReport verify_operator_transform(const OrderedPath& path);
VerifyReport verify_extension(const OrderedPath& path, unsigned seed);
VerifyReport verify_transform_solution(const OrderedPath& path, unsigned seed);
VerifyReport verify_face_dictionary(const OrderedPath& path, unsigned seed);
VerifyReport verify_face_restrictions(const OrderedPath& path);
VerifyReport verify_solver(const OrderedPath& path);
VerifyReport verify_incompatibility();

VerifyReport verify_suite(const std::string& name, const OrderedPath& path,
                          unsigned seed);
VerifyReport verify_all(const OrderedPath& path, unsigned seed);

std::vector<std::string> verify_suite_names();

}  // namespace wfblow
