#pragma once

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hdiff/error.hpp"
#include "hdiff/measure.hpp"

namespace hdiff::detail {

using nlohmann::json;

/// Maps JSON paths ("pieces[1].to") to the line where their value starts.
class LineIndex {
public:
    explicit LineIndex(std::string_view text) { scan(text); }

    int line_of(const std::string& path) const {
        for (std::string p = path;;) {
            if (auto it = lines_.find(p); it != lines_.end()) return it->second;
            const auto cut = p.find_last_of(".[");
            if (cut == std::string::npos) return 1;
            p.resize(cut);
        }
    }

private:
    struct Frame {
        bool array;
        int index = 0;
        std::string key;
        std::string base;
    };

    void scan(std::string_view t) {
        std::vector<Frame> stack;
        int line = 1;
        bool expect_key = false;
        auto current_path = [&]() -> std::string {
            if (stack.empty()) return {};
            const auto& f = stack.back();
            if (f.array) return f.base + "[" + std::to_string(f.index) + "]";
            return f.base.empty() ? f.key : f.base + "." + f.key;
        };
        auto mark = [&] {
            const auto p = current_path();
            if (!p.empty() && !lines_.count(p)) lines_[p] = line;
        };
        for (std::size_t i = 0; i < t.size(); ++i) {
            const char c = t[i];
            if (c == '\n') {
                ++line;
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(c)) || c == ':') continue;
            if (c == '"') {
                std::string s;
                for (++i; i < t.size() && t[i] != '"'; ++i) {
                    if (t[i] == '\\' && i + 1 < t.size()) ++i;
                    if (t[i] == '\n') ++line;
                    s += t[i];
                }
                if (expect_key) {
                    stack.back().key = s;
                    expect_key = false;
                } else {
                    mark();
                }
                continue;
            }
            if (c == '{' || c == '[') {
                mark();
                stack.push_back(Frame{c == '[', 0, {}, current_path()});
                expect_key = c == '{';
                continue;
            }
            if (c == '}' || c == ']') {
                if (!stack.empty()) stack.pop_back();
                continue;
            }
            if (c == ',') {
                if (!stack.empty()) {
                    if (stack.back().array)
                        ++stack.back().index;
                    else
                        expect_key = true;
                }
                continue;
            }
            mark();
            while (i + 1 < t.size() && std::string_view(",]}\n").find(t[i + 1]) == std::string_view::npos)
                ++i;
        }
    }

    std::map<std::string, int> lines_;
};

class Reader {
public:
    explicit Reader(std::string_view text) : index_(text) {}

    [[noreturn]] void fail(const std::string& path, const std::string& what) const {
        throw ParseError(index_.line_of(path), path.empty() ? "document" : path, what);
    }

    double number(const json& j, const std::string& path, bool allow_inf) const {
        if (j.is_number()) {
            const double v = j.get<double>();
            if (!std::isfinite(v)) fail(path, "not a finite number");
            return v;
        }
        if (allow_inf && j.is_string() && j.get<std::string>() == "inf") return kInf;
        fail(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
    }

    const json& field(const json& obj, const std::string& key, const std::string& path) const {
        if (!obj.is_object()) fail(path, "expected an object");
        auto it = obj.find(key);
        if (it == obj.end()) fail(path, "missing field '" + key + "'");
        return *it;
    }

    /// Rejects keys of `obj` outside `allowed`.
    void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (auto k : allowed) known = known || k == it.key();
            if (!known) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key '" + it.key() + "'");
        }
    }

    int line_of(const std::string& path) const { return index_.line_of(path); }

private:
    LineIndex index_;
};

}  // namespace hdiff::detail
