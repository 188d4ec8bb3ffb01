#pragma once

#include "mmen/graph.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmen {

namespace io {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T> std::optional<T> parse_number(std::string_view s) {
    T value{};
    const auto *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

inline std::optional<bool> parse_bool(std::string_view s) {
    if (s == "1" || s == "true" || s == "True" || s == "TRUE") return true;
    if (s == "0" || s == "false" || s == "False" || s == "FALSE") return false;
    return std::nullopt;
}

/// Tabs and line breaks cannot appear inside a TSV cell.
inline std::string sanitize_cell(const std::string &s) {
    std::string out = s;
    for (char &c : out)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return out;
}

} // namespace io

inline constexpr const char *kEdgesFile = "edges.tsv";
inline constexpr const char *kUsersFile = "users.tsv";
inline constexpr std::string_view kUserColumns[] = {
    "id", "name", "description", "followers", "friends", "statuses", "verified", "geo_enabled"};

/// Reads `edges.tsv` (src TAB dst TAB delay_s) and the optional `users.tsv`
/// from a cascade directory. Original ids are densified to 0..N-1 in order of
/// first appearance and kept as node labels.
inline CascadeGraph load_cascade(const std::filesystem::path &dir) {
    namespace fs = std::filesystem;
    const fs::path edges_path = dir / kEdgesFile;
    std::ifstream in(edges_path);
    if (!in) throw DataError("cannot open " + edges_path.string());

    std::unordered_map<std::string, NodeId> ids;
    std::vector<std::string> labels;
    auto intern = [&](std::string_view name) {
        auto [it, inserted] = ids.try_emplace(std::string(name), static_cast<NodeId>(labels.size()));
        if (inserted) labels.emplace_back(name);
        return it->second;
    };

    std::vector<Edge> edges;
    std::unordered_map<NodeId, double> delay;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = io::trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto fields = io::split(view, '\t');
        if (fields.size() < 2 || fields.size() > 3)
            throw ParseError(edges_path.string(), lineno, "expected src<TAB>dst[<TAB>delay_s]");
        const auto src = io::trim(fields[0]);
        const auto dst = io::trim(fields[1]);
        if (src.empty() || dst.empty())
            throw ParseError(edges_path.string(), lineno, "empty node id");
        const NodeId s = intern(src);
        const NodeId d = intern(dst);
        if (fields.size() == 3 && !io::trim(fields[2]).empty()) {
            const auto value = io::parse_number<double>(io::trim(fields[2]));
            if (!value || !std::isfinite(*value) || *value < 0.0)
                throw ParseError(edges_path.string(), lineno,
                                 "delay_s must be a non-negative number");
            delay.try_emplace(d, *value);
        }
        edges.emplace_back(s, d);
    }
    if (edges.empty()) throw DataError(edges_path.string() + ": no edges");

    std::vector<UserRecord> users(labels.size());
    for (const auto &[v, secs] : delay) users[v].retweet_delay_s = secs;

    const fs::path users_path = dir / kUsersFile;
    if (fs::exists(users_path)) {
        std::ifstream uin(users_path);
        if (!uin) throw DataError("cannot open " + users_path.string());
        std::size_t uline = 0;
        std::vector<int> column_of(std::size(kUserColumns), -1);
        bool have_header = false;
        std::vector<bool> seen(labels.size(), false);
        while (std::getline(uin, line)) {
            ++uline;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const auto cells = io::split(line, '\t');
            if (!have_header) {
                for (std::size_t c = 0; c < cells.size(); ++c)
                    for (std::size_t k = 0; k < std::size(kUserColumns); ++k)
                        if (io::trim(cells[c]) == kUserColumns[k]) column_of[k] = static_cast<int>(c);
                if (column_of[0] < 0)
                    throw ParseError(users_path.string(), uline, "header lacks an 'id' column");
                have_header = true;
                continue;
            }
            auto cell = [&](std::size_t k) -> std::string_view {
                const int c = column_of[k];
                if (c < 0 || static_cast<std::size_t>(c) >= cells.size()) return {};
                return cells[static_cast<std::size_t>(c)];
            };
            const std::string id(io::trim(cell(0)));
            const auto it = ids.find(id);
            if (it == ids.end())
                throw ParseError(users_path.string(), uline,
                                 "user row '" + id + "' does not match any node in edges.tsv");
            if (seen[it->second])
                throw ParseError(users_path.string(), uline, "duplicate user row '" + id + "'");
            seen[it->second] = true;
            UserRecord &rec = users[it->second];
            if (auto s = cell(1); !s.empty()) rec.name = std::string(s);
            if (auto s = cell(2); !s.empty()) rec.description = std::string(s);
            auto count_field = [&](std::size_t k, std::optional<std::uint64_t> &dst) {
                const auto s = io::trim(cell(k));
                if (s.empty()) return;
                const auto value = io::parse_number<std::uint64_t>(s);
                if (!value)
                    throw ParseError(users_path.string(), uline,
                                     std::string(kUserColumns[k]) + " must be a non-negative integer");
                dst = *value;
            };
            count_field(3, rec.followers_count);
            count_field(4, rec.friends_count);
            count_field(5, rec.statuses_count);
            auto flag_field = [&](std::size_t k, std::optional<bool> &dst) {
                const auto s = io::trim(cell(k));
                if (s.empty()) return;
                const auto value = io::parse_bool(s);
                if (!value)
                    throw ParseError(users_path.string(), uline,
                                     std::string(kUserColumns[k]) + " must be 0/1/true/false");
                dst = *value;
            };
            flag_field(6, rec.verified);
            flag_field(7, rec.geo_enabled);
        }
    }

    const std::size_t n = labels.size();
    return CascadeGraph(n, std::move(edges), std::move(users), std::nullopt, std::move(labels));
}

/// Writes the graph in the same formats `load_cascade` reads. The delay column
/// of each edge carries the retweet delay of its destination node.
inline void save_cascade(const CascadeGraph &g, const std::filesystem::path &dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

    {
        const fs::path p = dir / kEdgesFile;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DataError("cannot write " + p.string());
        out << "# src\tdst\tdelay_s\n";
        for (const auto &[s, d] : g.edges()) {
            out << g.label(s) << '\t' << g.label(d) << '\t';
            if (const auto &secs = g.user(d).retweet_delay_s) out << io::format_double(*secs);
            out << '\n';
        }
        if (!out) throw DataError("write failed: " + p.string());
    }
    {
        const fs::path p = dir / kUsersFile;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DataError("cannot write " + p.string());
        for (std::size_t k = 0; k < std::size(kUserColumns); ++k)
            out << (k ? "\t" : "") << kUserColumns[k];
        out << '\n';
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            const UserRecord &u = g.user(v);
            out << g.label(v) << '\t';
            if (u.name) out << io::sanitize_cell(*u.name);
            out << '\t';
            if (u.description) out << io::sanitize_cell(*u.description);
            out << '\t';
            if (u.followers_count) out << *u.followers_count;
            out << '\t';
            if (u.friends_count) out << *u.friends_count;
            out << '\t';
            if (u.statuses_count) out << *u.statuses_count;
            out << '\t';
            if (u.verified) out << (*u.verified ? 1 : 0);
            out << '\t';
            if (u.geo_enabled) out << (*u.geo_enabled ? 1 : 0);
            out << '\n';
        }
        if (!out) throw DataError("write failed: " + p.string());
    }
}

} // namespace mmen
