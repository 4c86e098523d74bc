#include "psm/csv.hpp"

#include "psm/errors.hpp"

namespace psm::csv {

std::vector<Record> read_all(std::istream& in) {
  std::vector<Record> records;
  Record current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_has_content = false;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (record_has_content || !current.empty()) {
      end_field();
      records.push_back(std::move(current));
    }
    current.clear();
    field.clear();
    field_started = false;
    record_has_content = false;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started) {
          in_quotes = true;
          field_started = true;
          record_has_content = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        record_has_content = true;
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') break;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        record_has_content = true;
        break;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  end_record();
  return records;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const Record& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line.push_back(',');
    line += escape(fields[i]);
  }
  return line;
}

}  // namespace psm::csv
