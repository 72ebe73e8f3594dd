#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace arqa {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key = value file: one pair per line, '#' comments, optional quotes
// around the value.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv(const std::string& content, const std::string& where);

} // namespace arqa
