#include "mvt/measure_io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mvt/errors.hpp"

namespace mvt {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigError(fmt::format("line {}: cannot parse number '{}'", line_no, s));
  return v;
}

}  // namespace

void write_measure_csv(std::ostream& out, const DiscreteSignedMeasure& mu) {
  const int d = mu.domain().dim;
  for (int i = 0; i < d; ++i) out << 'x' << (i + 1) << ',';
  out << "weight\n";
  for (const auto& a : mu.atoms()) {
    for (int i = 0; i < d; ++i) out << fmt::format("{:.17g},", a.point[i]);
    out << fmt::format("{:.17g}\n", a.weight);
  }
}

void write_measure_csv(const std::filesystem::path& path, const DiscreteSignedMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  write_measure_csv(out, mu);
}

DiscreteSignedMeasure read_measure_csv(std::istream& in, DomainKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("line 1: empty measure file");
  const auto header = split_csv_line(line);
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1 || d > 3 || header.back() != "weight")
    throw ConfigError("line 1: expected header x1,...,xd,weight with 1 <= d <= 3");
  for (int i = 0; i < d; ++i) {
    if (header[static_cast<std::size_t>(i)] != "x" + std::to_string(i + 1))
      throw ConfigError(fmt::format("line 1: expected column x{}", i + 1));
  }
  const Domain domain = make_domain(kind, d);
  std::vector<Atom> atoms;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d + 1)
      throw ConfigError(fmt::format("line {}: expected {} fields, got {}", line_no, d + 1,
                                    fields.size()));
    Atom a;
    for (int i = 0; i < d; ++i) a.point[i] = parse_double(fields[static_cast<std::size_t>(i)], line_no);
    a.weight = parse_double(fields.back(), line_no);
    atoms.push_back(a);
  }
  return DiscreteSignedMeasure(domain, std::move(atoms));
}

DiscreteSignedMeasure read_measure_csv(const std::filesystem::path& path, DomainKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open measure file: " + path.string());
  return read_measure_csv(in, kind);
}

}  // namespace mvt
