#include "partlag/dofcount.hpp"

#include <boost/algorithm/string/trim.hpp>

#include <fstream>
#include <regex>
#include <sstream>

namespace partlag::dof {

void InvolutiveTable::validate() const {
  for (const auto& [n, t] : equations) {
    if (n < 0 || t < 0) throw std::invalid_argument("negative equation order or count");
  }
  for (const auto* part : {&identities, &symmetries}) {
    for (const auto& [key, c] : *part) {
      if (key.first < 0 || key.second < 0 || c < 0) {
        throw std::invalid_argument("negative identity/symmetry order, reducibility or count");
      }
    }
  }
}

InvolutiveTable InvolutiveTable::merged(const InvolutiveTable& other) const {
  InvolutiveTable out = *this;
  out.label = label + "+" + other.label;
  for (const auto& [k, v] : other.equations) out.equations[k] += v;
  for (const auto& [k, v] : other.identities) out.identities[k] += v;
  for (const auto& [k, v] : other.symmetries) out.symmetries[k] += v;
  return out;
}

long dof(const InvolutiveTable& table) {
  long total = 0;
  for (const auto& [n, t] : table.equations) total += n * t;
  for (const auto* part : {&table.identities, &table.symmetries}) {
    for (const auto& [key, c] : *part) {
      const auto [n, m] = key;
      total -= (m % 2 == 0 ? 1 : -1) * n * c;
    }
  }
  return total;
}

std::vector<std::string> builtin_names() {
  return {"cotton", "einstein-linear", "central-field", "central-field-multiplier"};
}

InvolutiveTable builtin(const std::string& name) {
  InvolutiveTable t;
  t.label = name;
  if (name == "cotton") {
    t.equations = {{2, 1}, {3, 24}};
    t.symmetries = {{{1, 0}, 4}};
    t.identities = {{{3, 0}, 8}, {{4, 0}, 15}, {{5, 1}, 4}};
  } else if (name == "einstein-linear") {
    // 10 metric components, 4 diffeomorphisms, 4 contracted Bianchi identities.
    t.equations = {{2, 10}};
    t.symmetries = {{{1, 0}, 4}};
    t.identities = {{{3, 0}, 4}};
  } else if (name == "central-field") {
    t.equations = {{2, 1}, {3, 1}};
  } else if (name == "central-field-multiplier") {
    t.equations = {{2, 3}};
  } else {
    throw std::out_of_range("unknown table '" + name + "'");
  }
  return t;
}

InvolutiveTable parse_table(const std::string& text) {
  static const std::regex eq_key(R"(t(\d+))");
  static const std::regex lr_key(R"(([lr])(\d+)\.(\d+))");
  static const std::regex count(R"(\d+)");
  InvolutiveTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw TableParseError(lineno, "expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    boost::algorithm::trim(key);
    boost::algorithm::trim(value);
    if (key == "label") {
      t.label = value;
      continue;
    }
    if (!std::regex_match(value, count)) {
      throw TableParseError(lineno, "count must be a non-negative integer, got '" + value + "'");
    }
    const long c = std::stol(value);
    std::smatch mt;
    if (std::regex_match(key, mt, eq_key)) {
      t.equations[std::stoi(mt[1])] += c;
    } else if (std::regex_match(key, mt, lr_key)) {
      auto& part = mt[1] == "l" ? t.identities : t.symmetries;
      part[{std::stoi(mt[2]), std::stoi(mt[3])}] += c;
    } else {
      throw TableParseError(lineno, "unknown key '" + key + "'");
    }
  }
  return t;
}

InvolutiveTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto t = parse_table(ss.str());
  if (t.label.empty()) t.label = path.stem().string();
  return t;
}

}  // namespace partlag::dof
