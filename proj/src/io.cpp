#include "polysparse/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace polysparse::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t\r\n,", pos);
    if (start == std::string_view::npos) break;
    const auto end = line.find_first_of(" \t\r\n,", start);
    out.push_back(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    pos = end == std::string_view::npos ? line.size() : end;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": cannot parse '" + std::string(tok) + "'");
  }
  return value;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

TMatrix parse_matrix(std::string_view text) {
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t n = 0;
  std::size_t m = 0;
  Vector diag;
  bool have_diag = false;
  std::vector<Triplet> entries;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.substr(0, 2) == "D:") {
      require(have_header, ErrorCode::ParseError, "line " + std::to_string(line_no) + ": D before header");
      have_diag = true;
      for (std::string_view tok : tokens(line.substr(2))) diag.push_back(parse_number<double>(tok, line_no));
      continue;
    }
    const auto toks = tokens(line);
    if (!have_header) {
      require(toks.size() == 2, ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected header 'n m'");
      n = parse_number<std::size_t>(toks[0], line_no);
      m = parse_number<std::size_t>(toks[1], line_no);
      have_header = true;
      continue;
    }
    require(toks.size() == 3, ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'i j w'");
    entries.push_back({parse_number<std::size_t>(toks[0], line_no), parse_number<std::size_t>(toks[1], line_no),
                       parse_number<double>(toks[2], line_no)});
  }
  require(have_header, ErrorCode::ParseError, "matrix file has no header");
  require(entries.size() == m, ErrorCode::ParseError,
          "header announces " + std::to_string(m) + " entries, found " + std::to_string(entries.size()));

  SparseSym sym = SparseSym::from_triplets(n, std::move(entries));
  if (!have_diag) diag = sym.row_sums();
  require(diag.size() == n, ErrorCode::DimensionMismatch,
          "D has " + std::to_string(diag.size()) + " values for dimension " + std::to_string(n));
  return build_tmatrix(PosDiag(std::move(diag)), std::move(sym));
}

std::string format_matrix(const TMatrix& b) {
  std::string out = "# polysparse matrix (" + std::string(to_string(b.kind())) + ")\n";
  out += std::to_string(b.dim()) + " " + std::to_string(b.m().stored_entries()) + "\n";
  const auto d = b.d().values();
  for (std::size_t i = 0; i < d.size(); i += 8) {
    out += "D:";
    for (std::size_t k = i; k < std::min(d.size(), i + 8); ++k) out += " " + format_double(d[k]);
    out += "\n";
  }
  for (const Triplet& t : b.m().entries()) {
    out += std::to_string(t.row) + " " + std::to_string(t.col) + " " + format_double(t.weight) + "\n";
  }
  return out;
}

TMatrix read_matrix(const std::string& path) { return parse_matrix(read_text(path)); }

void write_matrix(const std::string& path, const TMatrix& b) { write_text(path, format_matrix(b)); }

Vector parse_vector(std::string_view text) {
  text = trim(text);
  Vector out;
  if (!text.empty() && text.front() == '[') {
    const json j = parse_json(text, "vector");
    require(j.is_array(), ErrorCode::ParseError, "vector: expected a JSON array");
    for (const json& v : j) {
      require(v.is_number(), ErrorCode::ParseError, "vector: non-numeric entry");
      out.push_back(v.get<double>());
    }
    return out;
  }
  for (std::string_view tok : tokens(text)) out.push_back(parse_number<double>(tok, 1));
  return out;
}

std::string format_vector(const Vector& v) { return json(v).dump() + "\n"; }

Vector read_vector(const std::string& path) { return parse_vector(read_text(path)); }

MDBD parse_mdbd(std::string_view text) {
  const json j = parse_json(text, "MDBD");
  MDBD mix;
  try {
    mix.n = j.at("N").get<std::size_t>();
    mix.p = j.at("p").get<std::vector<double>>();
    mix.alpha = j.at("alpha").get<std::vector<double>>();
    if (j.contains("T")) {
      require(j.at("T").get<std::size_t>() == mix.p.size(), ErrorCode::ParseError, "MDBD: T does not match p");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("MDBD: ") + e.what());
  }
  mix.validate();
  return mix;
}

std::string format_mdbd(const MDBD& mix) {
  json j;
  j["N"] = mix.n;
  j["T"] = mix.t();
  j["p"] = mix.p;
  j["alpha"] = mix.alpha;
  return j.dump(2) + "\n";
}

MDBD read_mdbd(const std::string& path) { return parse_mdbd(read_text(path)); }

std::vector<std::size_t> parse_subset(std::string_view text) {
  const Vector raw = parse_vector(text);
  std::vector<std::size_t> out;
  out.reserve(raw.size());
  for (double v : raw) {
    require(v >= 0.0 && v == std::floor(v), ErrorCode::ParseError, "subset entries must be nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::size_t> read_subset(const std::string& path) { return parse_subset(read_text(path)); }

}  // namespace polysparse::io
