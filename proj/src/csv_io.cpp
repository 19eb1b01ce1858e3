#include "pskyline/csv_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

namespace pskyline {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, size_t line) {
  std::string t = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw io_error(fmt::format("line {}: '{}' is not a number", line, t));
  return v;
}

int64_t parse_int(const std::string& s, size_t line) {
  std::string t = trim(s);
  int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw io_error(fmt::format("line {}: '{}' is not an integer", line, t));
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open " + path + " for reading");
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open " + path + " for writing");
  return f;
}

bool blank(const std::string& line) { return trim(line).empty(); }

} // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

stream_file read_stream(std::istream& in) {
  stream_file s;
  std::string line;
  size_t no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++no;
    if (blank(line)) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      if (cells.size() < 4 || cells[0] != "id" || cells[1] != "arr" || cells[2] != "exp")
        throw io_error(fmt::format("line {}: stream header must start with id,arr,exp and name at least one attribute", no));
      s.attr_names.assign(cells.begin() + 3, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != s.attr_names.size() + 3)
      throw io_error(fmt::format("line {}: expected {} fields, found {}", no, s.attr_names.size() + 3, cells.size()));
    stream_object o;
    o.id = cells[0];
    if (o.id.empty()) throw io_error(fmt::format("line {}: empty id", no));
    o.arr = parse_int(cells[1], no);
    o.exp = parse_int(cells[2], no);
    for (size_t k = 3; k < cells.size(); ++k) {
      if (cells[k] == "-")
        o.attrs.emplace_back(std::nullopt);
      else
        o.attrs.emplace_back(parse_double(cells[k], no));
    }
    s.objects.push_back(std::move(o));
  }
  if (!have_header) throw io_error("stream file has no header");
  return s;
}

stream_file load_stream(const std::string& path) {
  auto f = open_in(path);
  return read_stream(f);
}

void write_stream(std::ostream& out, const stream_file& s) {
  out << "id,arr,exp";
  for (const auto& n : s.attr_names) out << ',' << n;
  out << '\n';
  for (const auto& o : s.objects) {
    out << o.id << ',' << o.arr << ',' << o.exp;
    for (const auto& a : o.attrs) out << ',' << (a ? format_number(*a) : std::string("-"));
    out << '\n';
  }
}

void save_stream(const std::string& path, const stream_file& s) {
  auto f = open_out(path);
  write_stream(f, s);
}

repository read_repository(std::istream& in) {
  repository r;
  std::string line;
  size_t no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++no;
    if (blank(line)) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      r.header = cells;
      if (r.header.empty()) throw io_error("repository header is empty");
      have_header = true;
      continue;
    }
    if (cells.size() != r.header.size())
      throw io_error(fmt::format("line {}: expected {} fields, found {}", no, r.header.size(), cells.size()));
    attr_vec row;
    for (const auto& c : cells) row.push_back(parse_double(c, no));
    r.rows.push_back(std::move(row));
  }
  if (!have_header) throw io_error("repository file has no header");
  return r;
}

repository load_repository(const std::string& path) {
  auto f = open_in(path);
  return read_repository(f);
}

void write_repository(std::ostream& out, const repository& r) {
  for (size_t k = 0; k < r.header.size(); ++k) out << (k ? "," : "") << r.header[k];
  out << '\n';
  for (const auto& row : r.rows) {
    for (size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << '\n';
  }
}

void save_repository(const std::string& path, const repository& r) {
  auto f = open_out(path);
  write_repository(f, r);
}

std::map<int64_t, std::vector<stream_object>> group_by_arrival(const std::vector<stream_object>& objs) {
  std::map<int64_t, std::vector<stream_object>> out;
  for (const auto& o : objs) out[o.arr].push_back(o);
  return out;
}

std::vector<answer_set> read_answers(std::istream& in) {
  std::vector<answer_set> out;
  std::string line;
  size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (blank(line)) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw io_error(fmt::format("line {}: missing ':' after the timestamp", no));
    answer_set a;
    a.t = parse_int(line.substr(0, colon), no);
    std::istringstream rest(line.substr(colon + 1));
    std::string tok;
    while (rest >> tok) {
      auto at = tok.rfind('@');
      if (at == std::string::npos || at == 0) throw io_error(fmt::format("line {}: '{}' is not id@p", no, tok));
      a.members.push_back({tok.substr(0, at), parse_double(tok.substr(at + 1), no), true});
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<answer_set> load_answers(const std::string& path) {
  auto f = open_in(path);
  return read_answers(f);
}

void write_answers(std::ostream& out, const std::vector<answer_set>& a) {
  for (const auto& s : a) out << format_answers(s) << '\n';
}

} // namespace pskyline
