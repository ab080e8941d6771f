#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kincal {

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("malformed number '" + std::string(s) + "'");
    return v;
}

// Flat key-value configuration text: [section] headers, one "key = value" per
// line, '#' starts a comment. Section and key order is preserved so a document
// serializes deterministically.
class ConfigDoc {
  public:
    struct Entry {
        std::string key;
        std::string value;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;
    };

    static ConfigDoc parse(const std::string& text) {
        ConfigDoc doc;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        Section* current = nullptr;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty())
                continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']' || trimmed.size() < 3)
                    throw std::invalid_argument(where(lineno) + "malformed section header");
                doc.sections_.push_back(Section{trimmed.substr(1, trimmed.size() - 2), {}});
                current = &doc.sections_.back();
                continue;
            }
            const std::size_t eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(where(lineno) + "expected 'key = value'");
            if (!current)
                throw std::invalid_argument(where(lineno) + "key outside any [section]");
            Entry e{trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1))};
            if (e.key.empty())
                throw std::invalid_argument(where(lineno) + "empty key");
            current->entries.push_back(std::move(e));
        }
        return doc;
    }

    static ConfigDoc load(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open config file '" + path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str());
    }

    std::string serialize() const {
        std::ostringstream out;
        bool first = true;
        for (const Section& s : sections_) {
            if (!first)
                out << '\n';
            first = false;
            out << '[' << s.name << "]\n";
            for (const Entry& e : s.entries)
                out << e.key << " = " << e.value << '\n';
        }
        return out.str();
    }

    bool has_section(std::string_view section) const { return find_section(section) != nullptr; }

    bool has(std::string_view section, std::string_view key) const {
        const Section* s = find_section(section);
        return s && find_entry(*s, key) != nullptr;
    }

    const std::string& get(std::string_view section, std::string_view key) const {
        const Section* s = find_section(section);
        if (!s)
            throw std::invalid_argument("missing config section [" + std::string(section) + "]");
        const Entry* e = find_entry(*s, key);
        if (!e)
            throw std::invalid_argument("missing config key '" + std::string(key) + "' in [" +
                                        std::string(section) + "]");
        return e->value;
    }

    std::string get_string(std::string_view section, std::string_view key) const {
        return get(section, key);
    }

    std::string get_string(std::string_view section, std::string_view key,
                           const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_double(std::string_view section, std::string_view key) const {
        return parse_double(get(section, key));
    }

    double get_double(std::string_view section, std::string_view key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    int get_int(std::string_view section, std::string_view key) const {
        return static_cast<int>(parse_integer(get(section, key)));
    }

    int get_int(std::string_view section, std::string_view key, int fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    std::uint64_t get_u64(std::string_view section, std::string_view key) const {
        const std::string& v = get(section, key);
        std::uint64_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw std::invalid_argument("malformed unsigned integer '" + v + "'");
        return out;
    }

    std::uint64_t get_u64(std::string_view section, std::string_view key,
                          std::uint64_t fallback) const {
        return has(section, key) ? get_u64(section, key) : fallback;
    }

    bool get_bool(std::string_view section, std::string_view key) const {
        const std::string& v = get(section, key);
        if (v == "true")
            return true;
        if (v == "false")
            return false;
        throw std::invalid_argument("malformed bool '" + v + "' (expected true/false)");
    }

    bool get_bool(std::string_view section, std::string_view key, bool fallback) const {
        return has(section, key) ? get_bool(section, key) : fallback;
    }

    std::vector<double> get_doubles(std::string_view section, std::string_view key) const {
        std::istringstream in(get(section, key));
        std::vector<double> out;
        std::string tok;
        while (in >> tok)
            out.push_back(parse_double(tok));
        return out;
    }

    // Comma-separated tokens, whitespace-trimmed.
    std::vector<std::string> get_list(std::string_view section, std::string_view key) const {
        const std::string& v = get(section, key);
        std::vector<std::string> out;
        std::string tok;
        std::istringstream in(v);
        while (std::getline(in, tok, ',')) {
            tok = trim(tok);
            if (!tok.empty())
                out.push_back(tok);
        }
        return out;
    }

    void set(std::string_view section, std::string_view key, std::string value) {
        Section* s = find_section(section);
        if (!s) {
            sections_.push_back(Section{std::string(section), {}});
            s = &sections_.back();
        }
        if (Entry* e = find_entry(*s, key)) {
            e->value = std::move(value);
            return;
        }
        s->entries.push_back(Entry{std::string(key), std::move(value)});
    }

    std::vector<std::string> keys(std::string_view section) const {
        std::vector<std::string> out;
        if (const Section* s = find_section(section)) {
            for (const Entry& e : s->entries)
                out.push_back(e.key);
        }
        return out;
    }

    std::vector<std::string> section_names() const {
        std::vector<std::string> out;
        for (const Section& s : sections_)
            out.push_back(s.name);
        return out;
    }

  private:
    static std::string where(int lineno) {
        return "config line " + std::to_string(lineno) + ": ";
    }

    static std::string trim(const std::string& s) {
        const std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos)
            return {};
        const std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static std::int64_t parse_integer(const std::string& v) {
        std::int64_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw std::invalid_argument("malformed integer '" + v + "'");
        return out;
    }

    const Section* find_section(std::string_view name) const {
        for (const Section& s : sections_)
            if (s.name == name)
                return &s;
        return nullptr;
    }

    Section* find_section(std::string_view name) {
        for (Section& s : sections_)
            if (s.name == name)
                return &s;
        return nullptr;
    }

    static const Entry* find_entry(const Section& s, std::string_view key) {
        for (const Entry& e : s.entries)
            if (e.key == key)
                return &e;
        return nullptr;
    }

    static Entry* find_entry(Section& s, std::string_view key) {
        for (Entry& e : s.entries)
            if (e.key == key)
                return &e;
        return nullptr;
    }

    std::vector<Section> sections_;
};

}  // namespace kincal
