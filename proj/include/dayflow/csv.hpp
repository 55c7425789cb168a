/*
* Copyright (C) 2026 dayflow contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef DAYFLOW_CSV_HPP
#define DAYFLOW_CSV_HPP

#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dayflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : Error {
    using Error::Error;
};

namespace csv {

// Splits on the delimiter without quoting rules; the formats handled here are
// plain machine-written CSV. Views point into `line`.
inline void split(std::string_view line, std::vector<std::string_view>& out, char delim = ',')
{
    out.clear();
    size_t start = 0;
    while (true) {
        if (start >= line.size()) {
            out.push_back(line.substr(line.size()));
            return;
        }
        const void* hit = std::memchr(line.data() + start, delim, line.size() - start);
        if (hit == nullptr) {
            out.push_back(line.substr(start));
            return;
        }
        const size_t pos = static_cast<size_t>(static_cast<const char*>(hit) - line.data());
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::optional<double> parse_double(std::string_view s)
{
    double v;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s)
{
    std::int64_t v;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

// Shortest round-trip formatting; locale independent, so output bytes do not
// depend on the host environment.
inline void append_number(std::string& out, double v)
{
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, p);
}

inline std::string format_number(double v)
{
    std::string s;
    append_number(s, v);
    return s;
}

// Iterates '\n'-separated lines of an in-memory buffer, dropping a trailing
// '\r' so DOS files parse identically.
class LineCursor {
public:
    explicit LineCursor(std::string_view buffer) : buf_(buffer) {}

    std::optional<std::string_view> next()
    {
        if (pos_ >= buf_.size()) {
            return std::nullopt;
        }
        const void* hit  = std::memchr(buf_.data() + pos_, '\n', buf_.size() - pos_);
        const size_t end = hit ? static_cast<size_t>(static_cast<const char*>(hit) - buf_.data())
                               : buf_.size();
        std::string_view line = buf_.substr(pos_, end - pos_);
        pos_                  = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        return line;
    }

private:
    std::string_view buf_;
    size_t pos_ = 0;
};

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open file: " + path);
    }
    std::string data;
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size > 0) {
        data.resize(static_cast<size_t>(size));
        in.seekg(0);
        in.read(data.data(), size);
    }
    if (in.bad()) {
        throw Error("i/o error reading file: " + path);
    }
    return data;
}

inline void write_file(const std::string& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open file for writing: " + path);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error("i/o error writing file: " + path);
    }
}

} // namespace csv
} // namespace dayflow

#endif // DAYFLOW_CSV_HPP
