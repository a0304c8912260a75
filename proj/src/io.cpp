#include "uncnet/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "uncnet/errors.hpp"

namespace uncnet {

namespace {

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("FileNotFound", "cannot open " + path);
    return in;
}

std::ofstream create_or_throw(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("FileWriteFailed", "cannot create " + path);
    return out;
}

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

// Returns the value of "# key=<value>" when the line is that header.
bool header_value(const std::string& line, const std::string& key, std::string& value) {
    const std::string prefix = "# " + key + "=";
    if (line.rfind(prefix, 0) != 0) return false;
    value = line.substr(prefix.size());
    while (!value.empty() && (value.back() == '\r' || value.back() == '\n')) value.pop_back();
    return true;
}

std::size_t parse_size(const std::string& text, std::size_t line_no, const char* what) {
    std::size_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw ParseError(line_no, std::string("bad ") + what + " '" + text + "'");
    return v;
}

struct Row {
    std::vector<std::string> fields;
};

bool next_row(std::istream& in, std::size_t& line_no, std::string& raw, Row& row,
              std::size_t* header_n, const char* header_key) {
    while (std::getline(in, raw)) {
        ++line_no;
        if (is_blank(raw)) continue;
        if (raw[0] == '#') {
            std::string v;
            if (header_n && header_value(raw, header_key, v))
                *header_n = parse_size(v, line_no, header_key);
            continue;
        }
        row.fields.clear();
        std::stringstream ss(raw);
        std::string f;
        while (std::getline(ss, f, '\t')) {
            while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
            row.fields.push_back(f);
        }
        return true;
    }
    return false;
}

double parse_prob(const std::string& text, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line_no, "bad probability '" + text + "'");
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

UncertainNetwork parse_edgeprob(std::istream& in) {
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::size_t n = 0;
    bool have_n = false;
    std::size_t line_no = 0;
    std::string raw;
    Row row;
    std::vector<PairProb> pairs;
    std::unordered_set<std::uint64_t> seen;
    std::size_t probe = kUnset;

    // the header may appear before any pair line
    while (next_row(in, line_no, raw, row, &probe, "nodes")) {
        if (probe != kUnset && !have_n) {
            n = probe;
            have_n = true;
        }
        if (row.fields.size() != 3)
            throw ParseError(line_no, "expected 'i<TAB>j<TAB>q', got '" + raw + "'");
        if (!have_n) throw ParseError(line_no, "missing '# nodes=<n>' header before data");
        const std::size_t i = parse_size(row.fields[0], line_no, "node id");
        const std::size_t j = parse_size(row.fields[1], line_no, "node id");
        const double q = parse_prob(row.fields[2], line_no);
        if (i == j) throw ParseError(line_no, "self-pair at node " + std::to_string(i));
        if (i >= n || j >= n)
            throw ParseError(line_no, "node id out of range for n=" + std::to_string(n));
        if (!(q > 0.0) || q > 1.0)
            throw ParseError(line_no, "probability " + row.fields[2] + " outside (0,1]");
        const std::uint64_t key =
            static_cast<std::uint64_t>(std::min(i, j)) * n + std::max(i, j);
        if (!seen.insert(key).second)
            throw ParseError(line_no, "duplicate pair (" + std::to_string(i) + "," +
                                          std::to_string(j) + ")");
        pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), q});
    }
    if (!have_n) {
        if (probe != kUnset) n = probe;
        else throw ParseError(line_no, "missing '# nodes=<n>' header");
    }
    return UncertainNetwork::validate(n, std::move(pairs));
}

UncertainNetwork read_edgeprob_file(const std::string& path) {
    auto in = open_or_throw(path);
    return parse_edgeprob(in);
}

std::string serialize_edgeprob(const UncertainNetwork& net) {
    std::string out = "# nodes=" + std::to_string(net.node_count()) + "\n";
    for (const auto& p : net.pairs()) {
        out += std::to_string(p.i);
        out += '\t';
        out += std::to_string(p.j);
        out += '\t';
        out += fmt17(p.q);
        out += '\n';
    }
    return out;
}

void write_edgeprob_file(const std::string& path, const UncertainNetwork& net) {
    auto out = create_or_throw(path);
    out << serialize_edgeprob(net);
}

Partition read_partition_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::size_t k = 0;
    std::size_t line_no = 0;
    std::string raw;
    Row row;
    std::vector<std::pair<std::size_t, std::uint32_t>> entries;
    std::size_t max_node = 0;
    while (next_row(in, line_no, raw, row, &k, "k")) {
        if (row.fields.size() != 2)
            throw ParseError(line_no, "expected 'node<TAB>group', got '" + raw + "'");
        const std::size_t node = parse_size(row.fields[0], line_no, "node id");
        const std::size_t group = parse_size(row.fields[1], line_no, "group");
        entries.emplace_back(node, static_cast<std::uint32_t>(group));
        max_node = std::max(max_node, node);
    }
    if (entries.empty()) throw ParseError(line_no, "partition file has no rows");
    Partition part;
    part.g.assign(max_node + 1, 0);
    std::vector<bool> seen(max_node + 1, false);
    std::uint32_t max_group = 0;
    for (const auto& [node, group] : entries) {
        if (seen[node]) throw ParseError(0, "node " + std::to_string(node) + " listed twice");
        seen[node] = true;
        part.g[node] = group;
        max_group = std::max(max_group, group);
    }
    for (std::size_t i = 0; i <= max_node; ++i)
        if (!seen[i]) throw ParseError(0, "node " + std::to_string(i) + " missing from partition");
    part.k = k > 0 ? static_cast<std::uint32_t>(k) : max_group + 1;
    if (max_group >= part.k) throw ParseError(0, "group label exceeds k");
    return part;
}

void write_partition_file(const std::string& path, const Partition& part) {
    auto out = create_or_throw(path);
    out << "# k=" << part.k << "\n";
    for (std::size_t i = 0; i < part.g.size(); ++i) out << i << '\t' << part.g[i] << '\n';
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> read_edge_file(const std::string& path,
                                                                    std::size_t* n_out) {
    auto in = open_or_throw(path);
    std::size_t n = 0;
    std::size_t line_no = 0;
    std::string raw;
    Row row;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    while (next_row(in, line_no, raw, row, &n, "nodes")) {
        if (row.fields.size() != 2)
            throw ParseError(line_no, "expected 'i<TAB>j', got '" + raw + "'");
        const auto i = static_cast<std::uint32_t>(parse_size(row.fields[0], line_no, "node id"));
        const auto j = static_cast<std::uint32_t>(parse_size(row.fields[1], line_no, "node id"));
        if (i == j) throw ParseError(line_no, "self-edge at node " + std::to_string(i));
        edges.emplace_back(std::min(i, j), std::max(i, j));
    }
    if (n_out) *n_out = n;
    return edges;
}

void write_edge_file(const std::string& path,
                     const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                     std::size_t n) {
    auto out = create_or_throw(path);
    out << "# nodes=" << n << "\n";
    for (const auto& [i, j] : edges) out << i << '\t' << j << '\n';
}

EdgeScoreList read_scores_file(const std::string& path, std::size_t* n_out) {
    auto in = open_or_throw(path);
    std::size_t n = 0;
    std::size_t line_no = 0;
    std::string raw;
    Row row;
    EdgeScoreList list;
    while (next_row(in, line_no, raw, row, &n, "nodes")) {
        if (row.fields.size() != 3)
            throw ParseError(line_no, "expected 'i<TAB>j<TAB>score', got '" + raw + "'");
        const auto i = static_cast<std::uint32_t>(parse_size(row.fields[0], line_no, "node id"));
        const auto j = static_cast<std::uint32_t>(parse_size(row.fields[1], line_no, "node id"));
        const double s = parse_prob(row.fields[2], line_no);
        if (s < 0.0 || s > 1.0) throw ParseError(line_no, "score outside [0,1]");
        list.scores.push_back({std::min(i, j), std::max(i, j), s});
    }
    if (n_out) *n_out = n;
    return list;
}

void write_scores_file(const std::string& path, const EdgeScoreList& scores, std::size_t n) {
    auto out = create_or_throw(path);
    out << "# nodes=" << n << "\n";
    if (!scores.method.empty()) out << "# method=" << scores.method << "\n";
    for (const auto& s : scores.scores)
        out << s.i << '\t' << s.j << '\t' << fmt17(s.score) << '\n';
}

std::vector<std::string> read_label_map(const std::string& path, std::size_t n) {
    auto in = open_or_throw(path);
    std::vector<std::string> labels(n);
    std::size_t line_no = 0;
    std::string raw;
    Row row;
    while (next_row(in, line_no, raw, row, nullptr, "")) {
        if (row.fields.size() != 2)
            throw ParseError(line_no, "expected 'id<TAB>name', got '" + raw + "'");
        const std::size_t id = parse_size(row.fields[0], line_no, "node id");
        if (id >= n) throw ParseError(line_no, "node id out of range");
        labels[id] = row.fields[1];
    }
    return labels;
}

void write_roc_csv(const std::string& path, const ROCCurve& curve) {
    auto out = create_or_throw(path);
    out << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : curve.points) out << fmt17(fpr) << ',' << fmt17(tpr) << '\n';
}

} // namespace uncnet
