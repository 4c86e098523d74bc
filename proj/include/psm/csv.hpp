#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace psm::csv {

using Record = std::vector<std::string>;

// Reads comma-separated records with RFC 4180 double-quote quoting.
// Quoted fields may contain commas, doubled quotes and newlines. Both
// LF and CRLF line endings are accepted. A trailing empty line is not
// a record.
std::vector<Record> read_all(std::istream& in);

// Quotes a field only when it contains a comma, quote or line break.
std::string escape(std::string_view field);

std::string join(const Record& fields);

}  // namespace psm::csv
