#include "geognn/selig.hpp"

#include "geognn/error.hpp"

#include <fstream>
#include <sstream>

namespace geognn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_real(std::string_view& rest, double& value) {
  rest = trim(rest);
  if (rest.empty()) return false;
  const auto end = rest.find_first_of(" \t");
  std::string token(rest.substr(0, end));
  std::size_t used = 0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    return false;
  }
  if (used != token.size()) return false;
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  return true;
}

} // namespace

SeligAirfoil parse_selig(std::string_view text) {
  SeligAirfoil out;
  std::vector<double> xs, ys;
  std::size_t lineno = 0;
  bool have_name = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const std::string_view line = trim(raw);
    if (!have_name) {
      if (line.empty() && nl == std::string_view::npos) break;
      out.name = std::string(line);
      have_name = true;
      continue;
    }
    if (line.empty()) continue;
    std::string_view rest = line;
    double x = 0.0, y = 0.0;
    if (!parse_real(rest, x) || !parse_real(rest, y) || !trim(rest).empty()) {
      throw Error(ErrorKind::parse, "line " + std::to_string(lineno) + ": expected two reals, got '" +
                                        std::string(line) + "'");
    }
    if (x < -0.01 || x > 1.01) {
      throw Error(ErrorKind::parse, "line " + std::to_string(lineno) + ": x = " + std::to_string(x) +
                                        " lies outside the unit chord [0, 1]");
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  if (!have_name) throw Error(ErrorKind::parse, "empty coordinate file");
  if (xs.size() < 3) {
    throw Error(ErrorKind::parse, "airfoil needs at least 3 points, found " + std::to_string(xs.size()));
  }
  const auto n = static_cast<Index>(xs.size());
  out.points.resize(n, 2);
  for (Index k = 0; k < n; ++k) {
    out.points(k, 0) = xs[static_cast<std::size_t>(k)];
    out.points(k, 1) = ys[static_cast<std::size_t>(k)];
  }
  Index le = 0;
  for (Index k = 1; k < n; ++k) {
    if (out.points(k, 0) < out.points(le, 0)) le = k;
  }
  out.leading_edge = le;
  out.upper.resize(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) out.upper[static_cast<std::size_t>(k)] = k <= le;
  return out;
}

SeligAirfoil read_selig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_selig(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

} // namespace geognn
