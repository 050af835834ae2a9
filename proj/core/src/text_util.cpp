#include "bemflow/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace bemflow::text {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

std::string normalize_key(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return normalize_key(a) == normalize_key(b);
}

std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            std::string_view line = s.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.emplace_back(line);
            start = i + 1;
        }
    }
    if (!lines.empty() && lines.back().empty() && !s.empty() && s.back() == '\n') lines.pop_back();
    return lines;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t cost = (std::tolower(static_cast<unsigned char>(a[i - 1])) ==
                                std::tolower(static_cast<unsigned char>(b[j - 1])))
                                   ? 0
                                   : 1;
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

// Longest common subsequence table over line vectors; documents here are a
// few thousand lines at most.
std::vector<std::pair<int, int>> lcs_pairs(const std::vector<std::string>& a,
                                           const std::vector<std::string>& b) {
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            if (a[i] == b[j])
                dp[i][j] = dp[i + 1][j + 1] + 1;
            else
                dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
        }
    }
    std::vector<std::pair<int, int>> pairs;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n && j < m) {
        if (a[i] == b[j]) {
            pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
            ++i;
            ++j;
        } else if (dp[i + 1][j] >= dp[i][j + 1]) {
            ++i;
        } else {
            ++j;
        }
    }
    return pairs;
}

}  // namespace

std::string unified_diff(const std::string& before, const std::string& after,
                         const std::string& before_label, const std::string& after_label) {
    if (before == after) return std::string();
    const auto a = split_lines(before);
    const auto b = split_lines(after);
    const auto common = lcs_pairs(a, b);

    struct Edit {
        char op;  // ' ', '-', '+'
        std::string line;
        int a_line;
        int b_line;
    };
    std::vector<Edit> edits;
    std::size_t ai = 0;
    std::size_t bi = 0;
    for (auto [ci, cj] : common) {
        while (ai < static_cast<std::size_t>(ci))
            edits.push_back({'-', a[ai], static_cast<int>(ai++), -1});
        while (bi < static_cast<std::size_t>(cj))
            edits.push_back({'+', b[bi], -1, static_cast<int>(bi++)});
        edits.push_back({' ', a[ai], static_cast<int>(ai), static_cast<int>(bi)});
        ++ai;
        ++bi;
    }
    while (ai < a.size()) edits.push_back({'-', a[ai], static_cast<int>(ai++), -1});
    while (bi < b.size()) edits.push_back({'+', b[bi], -1, static_cast<int>(bi++)});

    constexpr int kContext = 2;
    std::ostringstream out;
    out << "--- " << before_label << "\n+++ " << after_label << "\n";

    std::size_t idx = 0;
    while (idx < edits.size()) {
        if (edits[idx].op == ' ') {
            ++idx;
            continue;
        }
        // Expand a hunk around this change.
        std::size_t hunk_begin = idx;
        while (hunk_begin > 0 && idx - hunk_begin < kContext && edits[hunk_begin - 1].op == ' ')
            --hunk_begin;
        std::size_t hunk_end = idx;
        std::size_t trailing = 0;
        while (hunk_end + 1 < edits.size()) {
            if (edits[hunk_end + 1].op == ' ') {
                if (trailing >= kContext) {
                    bool more_changes = false;
                    for (std::size_t k = hunk_end + 1;
                         k < std::min(edits.size(), hunk_end + 1 + 2 * kContext); ++k) {
                        if (edits[k].op != ' ') {
                            more_changes = true;
                            break;
                        }
                    }
                    if (!more_changes) break;
                }
                ++trailing;
            } else {
                trailing = 0;
            }
            ++hunk_end;
        }

        int a_start = 0;
        int b_start = 0;
        int a_count = 0;
        int b_count = 0;
        bool first = true;
        for (std::size_t k = hunk_begin; k <= hunk_end; ++k) {
            const Edit& e = edits[k];
            if (first) {
                a_start = (e.a_line >= 0 ? e.a_line : 0) + 1;
                b_start = (e.b_line >= 0 ? e.b_line : 0) + 1;
                first = false;
            }
            if (e.op != '+') ++a_count;
            if (e.op != '-') ++b_count;
        }
        out << "@@ -" << a_start << "," << a_count << " +" << b_start << "," << b_count << " @@\n";
        for (std::size_t k = hunk_begin; k <= hunk_end; ++k)
            out << edits[k].op << edits[k].line << "\n";
        idx = hunk_end + 1;
    }
    return out.str();
}

}  // namespace bemflow::text
