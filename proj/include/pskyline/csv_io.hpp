#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pskyline/engine.hpp"
#include "pskyline/model.hpp"
#include "pskyline/repo_index.hpp"

namespace pskyline {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// header `id,arr,exp,<attr names>`; rows with `-` for a missing value
struct stream_file {
  std::vector<std::string> attr_names;
  std::vector<stream_object> objects;
};

std::vector<std::string> split_csv_line(const std::string& line);

stream_file read_stream(std::istream& in);
stream_file load_stream(const std::string& path);
void write_stream(std::ostream& out, const stream_file& s);
void save_stream(const std::string& path, const stream_file& s);

repository read_repository(std::istream& in);
repository load_repository(const std::string& path);
void write_repository(std::ostream& out, const repository& r);
void save_repository(const std::string& path, const repository& r);

// arrivals grouped by arrival time, ascending
std::map<int64_t, std::vector<stream_object>> group_by_arrival(const std::vector<stream_object>& objs);

// one `t: id@p ...` line per tick
std::vector<answer_set> read_answers(std::istream& in);
std::vector<answer_set> load_answers(const std::string& path);
void write_answers(std::ostream& out, const std::vector<answer_set>& a);

std::string format_number(double v);

} // namespace pskyline
