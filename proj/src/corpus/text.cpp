#include "cnmt/corpus/text.hpp"

#include "cnmt/corpus/utf8.hpp"
#include "cnmt/errors.hpp"

namespace cnmt::corpus {

namespace {

const char* punct_replacement(char32_t cp) {
    switch (cp) {
    case 0x201C:
    case 0x201D:
    case 0x201E:
    case 0x201F:
    case 0x00AB:
    case 0x00BB:
        return "\"";
    case 0x2018:
    case 0x2019:
    case 0x201A:
    case 0x201B:
        return "'";
    case 0x2013:
    case 0x2014:
        return "-";
    case 0x2026:
        return "...";
    case 0x00A0:
    case 0x202F:
    case U'\t':
        return " ";
    default:
        return nullptr;
    }
}

bool is_punct(char c) {
    switch (c) {
    case '.':
    case ',':
    case ';':
    case ':':
    case '!':
    case '?':
    case '"':
    case '(':
    case ')':
        return true;
    default:
        return false;
    }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

void split_chunk(std::string_view chunk, Tokens& out) {
    Tokens leading;
    while (!chunk.empty() && is_punct(chunk.front())) {
        std::size_t n = 1;
        if (chunk.front() == '.') {
            while (n < chunk.size() && chunk[n] == '.') {
                ++n;
            }
        }
        leading.emplace_back(chunk.substr(0, n));
        chunk.remove_prefix(n);
    }
    Tokens trailing; // reversed
    while (!chunk.empty() && is_punct(chunk.back())) {
        std::size_t n = 1;
        if (chunk.back() == '.') {
            while (n < chunk.size() && chunk[chunk.size() - 1 - n] == '.') {
                ++n;
            }
        }
        trailing.emplace_back(chunk.substr(chunk.size() - n));
        chunk.remove_suffix(n);
    }
    out.insert(out.end(), leading.begin(), leading.end());
    if (!chunk.empty()) {
        out.emplace_back(chunk);
    }
    out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

} // namespace

std::string normalize_punct(std::string_view line) {
    std::string mapped;
    mapped.reserve(line.size());
    std::size_t pos = 0;
    while (pos < line.size()) {
        const std::size_t start = pos;
        auto cp = decode_one(line, pos);
        if (!cp) {
            mapped += line[start];
            pos = start + 1;
            continue;
        }
        if (const char* rep = punct_replacement(*cp)) {
            mapped += rep;
        } else {
            mapped.append(line.substr(start, pos - start));
        }
    }
    std::string out;
    out.reserve(mapped.size());
    for (char c : mapped) {
        if (c == ' ' && (out.empty() || out.back() == ' ')) {
            continue;
        }
        out += c;
    }
    while (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

Tokens tokenize(std::string_view line, std::size_t line_no) {
    if (!is_valid_utf8(line)) {
        throw InputError("line " + std::to_string(line_no) + ": invalid UTF-8");
    }
    Tokens out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && is_space(line[pos])) {
            ++pos;
        }
        const std::size_t start = pos;
        while (pos < line.size() && !is_space(line[pos])) {
            ++pos;
        }
        if (pos > start) {
            split_chunk(line.substr(start, pos - start), out);
        }
    }
    return out;
}

std::string join(const Tokens& tokens, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += tokens[i];
    }
    return out;
}

Tokens split_tokens(std::string_view line) {
    Tokens out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const std::size_t next = line.find(' ', pos);
        const std::size_t end = next == std::string_view::npos ? line.size() : next;
        if (end > pos) {
            out.emplace_back(line.substr(pos, end - pos));
        }
        pos = end + 1;
    }
    return out;
}

} // namespace cnmt::corpus
