#include "eva/json_lines.hpp"

#include <vector>

namespace eva {

std::size_t line_at_offset(std::string_view text, std::size_t offset) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n')
            ++line;
    return line;
}

namespace {

// Frame of the minimal scanner: either an object (tracks the pending key) or
// an array (tracks the element index).
struct Frame {
    bool is_array;
    std::size_t index = 0;
    std::string key;
};

std::string escape_token(const std::string &key) {
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

std::string current_path(const std::vector<Frame> &stack) {
    std::string path;
    for (const auto &f : stack)
        path += "/" + (f.is_array ? std::to_string(f.index) : escape_token(f.key));
    return path;
}

} // namespace

std::size_t line_of_pointer(std::string_view text, const std::string &pointer) {
    if (pointer.empty())
        return 1;
    std::vector<Frame> stack;
    std::size_t line = 1;
    bool expect_key = false;

    auto at_value = [&](std::size_t) { return current_path(stack) == pointer; };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == ':')
            continue;
        if (c == '"') {
            std::string s;
            for (++i; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\' && i + 1 < text.size()) {
                    s += text[i];
                    ++i;
                }
                s += text[i];
            }
            if (expect_key) {
                stack.back().key = s;
                expect_key = false;
            } else if (!stack.empty() && at_value(i)) {
                return line;
            }
            continue;
        }
        if (c == ',') {
            if (!stack.empty()) {
                if (stack.back().is_array)
                    ++stack.back().index;
                else
                    expect_key = true;
            }
            continue;
        }
        if (c == '{' || c == '[') {
            if (!stack.empty() && at_value(i))
                return line;
            stack.push_back(Frame{c == '[', 0, {}});
            expect_key = c == '{';
            continue;
        }
        if (c == '}' || c == ']') {
            if (!stack.empty())
                stack.pop_back();
            expect_key = false;
            continue;
        }
        // scalar literal start
        if (!stack.empty() && at_value(i))
            return line;
        while (i + 1 < text.size() && text[i + 1] != ',' && text[i + 1] != '}' && text[i + 1] != ']' &&
               text[i + 1] != '\n' && text[i + 1] != ' ')
            ++i;
    }
    return 1;
}

} // namespace eva
