#pragma once

// Sample texts and the shipped libraries for the test suites.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "elfe/kernel.hpp"
#include "elfe/language.hpp"

namespace elfe::testdata {

inline std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::filesystem::path> libPath() { return {ELFE_LIB_DIR}; }

inline std::string sample(const std::string& name) {
  return readFile(std::filesystem::path(ELFE_SAMPLES_DIR) / (name + ".elfe"));
}

inline const std::vector<std::string>& sampleNames() {
  static const std::vector<std::string> names = {"injective", "injective_wrong", "relations",
                                                 "relations_wrong", "complement"};
  return names;
}

inline kernel::Statement elaborateSample(const std::string& name) {
  return kernel::elaborate(language::load(sample(name), libPath()));
}

inline std::vector<kernel::Obligation> sampleObligations(const std::string& name) {
  return kernel::collectObligations(elaborateSample(name));
}

inline const kernel::Obligation& obligation(const std::vector<kernel::Obligation>& obs,
                                            const std::string& id) {
  for (const auto& o : obs)
    if (o.id == id) return o;
  throw std::out_of_range("no obligation " + id);
}

}  // namespace elfe::testdata
