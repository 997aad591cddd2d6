#include "eot/io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "eot/error.hpp"

namespace eot {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

double parse_number(const std::string& tok, const std::string& origin, std::size_t lineno) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  require(end == tok.c_str() + tok.size(), errc::parse_error,
          origin + ":" + std::to_string(lineno) + ": not a number: '" + tok + "'");
  return v;
}

}  // namespace

Measure measure_from_text(const std::string& text, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::size_t columns = 0;
  std::size_t start = 0, lineno = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (rows.empty()) {
      columns = toks.size();
      require(columns >= 2, errc::parse_error,
              origin + ":" + std::to_string(lineno) +
                  ": need at least a weight and one coordinate per atom");
    } else {
      require(toks.size() == columns, errc::parse_error,
              origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                  " columns, got " + std::to_string(toks.size()));
    }
    std::vector<double> row;
    row.reserve(columns);
    for (const std::string& t : toks) row.push_back(parse_number(t, origin, lineno));
    rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  require(!rows.empty(), errc::parse_error, origin + ": no atoms found");

  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = static_cast<Eigen::Index>(columns - 1);
  Eigen::MatrixXd points(n, d);
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    weights[i] = rows[static_cast<std::size_t>(i)][0];
    for (Eigen::Index j = 0; j < d; ++j)
      points(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1];
  }
  return make_measure(points, weights);
}

Measure read_measure(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::parse_error, "cannot open measure file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return measure_from_text(buf.str(), path);
}

}  // namespace eot
