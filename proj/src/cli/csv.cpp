#include "cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ipl/errors.hpp"

namespace ipl::csv {

namespace {

struct Field {
  std::string text;
  std::size_t column = 1;  // 1-based character position
};

class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-blank line split on commas; false at end of input.
  bool next(std::vector<Field>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      fields.clear();
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        const auto end = comma == std::string::npos ? line.size() : comma;
        fields.push_back({trim(line.substr(start, end - start)), start + 1});
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void error(std::size_t column, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ":" << line_no_ << ":" << column << ": " << msg;
    fail(ErrorKind::ParseError, os.str());
  }

  double number(const Field& f, const char* what) const {
    if (f.text.empty()) error(f.column, std::string("missing value for ") + what);
    double v = 0.0;
    const auto* first = f.text.data();
    const auto* last = first + f.text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) error(f.column, std::string("invalid number for ") + what + ": '" + f.text + "'");
    if (!std::isfinite(v)) error(f.column, std::string("non-finite value for ") + what);
    return v;
  }

  int flag(const Field& f, const char* what, int lo, int hi) const {
    const double v = number(f, what);
    if (v != std::floor(v) || v < lo || v > hi) {
      std::ostringstream os;
      os << what << " must be an integer in [" << lo << ", " << hi << "], got '" << f.text << "'";
      error(f.column, os.str());
    }
    return static_cast<int>(v);
  }

  std::size_t line() const { return line_no_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

void expect_header(Reader& rd, const std::vector<Field>& got, const std::vector<std::string>& want) {
  if (got.size() != want.size()) {
    std::ostringstream os;
    os << "header has " << got.size() << " columns, expected " << want.size();
    rd.error(1, os.str());
  }
  for (std::size_t k = 0; k < want.size(); ++k)
    if (got[k].text != want[k]) rd.error(got[k].column, "expected header '" + want[k] + "', got '" + got[k].text + "'");
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::ParseError, path + ": cannot open file");
  return in;
}

}  // namespace

std::vector<SurvivalRecord> read_prop_odds(std::istream& in, const std::string& source) {
  Reader rd(in, source);
  std::vector<Field> fields;
  if (!rd.next(fields)) fail(ErrorKind::ParseError, source + ": empty input");
  if (fields.size() < 3) rd.error(1, "header must be U,delta,Z1,...,Zp");
  std::vector<std::string> header{"U", "delta"};
  for (std::size_t k = 1; k + 2 <= fields.size(); ++k) header.push_back("Z" + std::to_string(k));
  expect_header(rd, fields, header);
  const auto p = static_cast<Eigen::Index>(header.size() - 2);

  std::vector<SurvivalRecord> out;
  while (rd.next(fields)) {
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << "expected " << header.size() << " fields, got " << fields.size();
      rd.error(fields.size() > header.size() ? fields[header.size()].column : 1, os.str());
    }
    SurvivalRecord r;
    r.U = rd.number(fields[0], "U");
    if (r.U <= 0.0) rd.error(fields[0].column, "U must be positive");
    r.delta = rd.flag(fields[1], "delta", 0, 1);
    r.Z.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) r.Z[k] = rd.number(fields[static_cast<std::size_t>(k) + 2], "Z");
    out.push_back(std::move(r));
  }
  if (out.empty()) fail(ErrorKind::ParseError, source + ": no data rows");
  return out;
}

std::vector<MissingCovRecord> read_missing_cov(std::istream& in, const std::string& source) {
  Reader rd(in, source);
  std::vector<Field> fields;
  if (!rd.next(fields)) fail(ErrorKind::ParseError, source + ": empty input");
  expect_header(rd, fields, {"R", "Y", "X"});

  std::vector<MissingCovRecord> out;
  while (rd.next(fields)) {
    if (fields.size() != 3) {
      std::ostringstream os;
      os << "expected 3 fields, got " << fields.size();
      rd.error(fields.size() > 3 ? fields[3].column : 1, os.str());
    }
    MissingCovRecord r;
    r.R = rd.flag(fields[0], "R", 1, 2);
    r.Y = rd.number(fields[1], "Y");
    if (r.R == 1) {
      r.X = rd.number(fields[2], "X");
    } else if (!fields[2].text.empty()) {
      rd.error(fields[2].column, "X must be blank when R = 2");
    }
    out.push_back(r);
  }
  if (out.empty()) fail(ErrorKind::ParseError, source + ": no data rows");
  return out;
}

std::vector<SurvivalRecord> read_prop_odds_file(const std::string& path) {
  auto in = open(path);
  return read_prop_odds(in, path);
}

std::vector<MissingCovRecord> read_missing_cov_file(const std::string& path) {
  auto in = open(path);
  return read_missing_cov(in, path);
}

std::string write_prop_odds(const std::vector<SurvivalRecord>& data) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto p = data.empty() ? 1 : data.front().Z.size();
  os << "U,delta";
  for (Eigen::Index k = 0; k < p; ++k) os << ",Z" << k + 1;
  os << '\n';
  for (const auto& r : data) {
    os << r.U << ',' << r.delta;
    for (Eigen::Index k = 0; k < p; ++k) os << ',' << r.Z[k];
    os << '\n';
  }
  return os.str();
}

std::string write_missing_cov(const std::vector<MissingCovRecord>& data) {
  std::ostringstream os;
  os << std::setprecision(17) << "R,Y,X\n";
  for (const auto& r : data) {
    os << r.R << ',' << r.Y << ',';
    if (r.X) os << *r.X;
    os << '\n';
  }
  return os.str();
}

}  // namespace ipl::csv
