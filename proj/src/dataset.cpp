#include "dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace rlf {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::string lower(std::string s) {
    for (char& ch : s) ch = char(std::tolower(static_cast<unsigned char>(ch)));
    return s;
}

std::string basename_no_ext(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
    std::size_t dot = base.find_last_of('.');
    return (dot == std::string::npos) ? base : base.substr(0, dot);
}

// Shared tail of both loaders: map the two raw label strings onto {0,1}.
Dataset assemble(std::string name, std::vector<std::vector<double>> rows,
                 const std::vector<std::string>& raw_labels,
                 const std::string& positive_label, bool keel_convention) {
    std::map<std::string, std::size_t> counts;
    for (const auto& v : raw_labels) counts[v]++;
    if (counts.size() < 2)
        throw InputError(name + ": single-class data (label '" +
                         (counts.empty() ? "" : counts.begin()->first) + "' only)");
    if (counts.size() > 2) {
        std::string seen;
        for (const auto& [v, c] : counts) seen += (seen.empty() ? "" : ", ") + v;
        throw InputError(name + ": expected 2 label values, found " +
                         std::to_string(counts.size()) + " (" + seen + ")");
    }

    std::string positive;
    if (!positive_label.empty()) {
        if (!counts.count(positive_label))
            throw InputError(name + ": positive label '" + positive_label +
                             "' does not occur in the data");
        positive = positive_label;
    } else {
        auto a = counts.begin(), b = std::next(counts.begin());
        if (keel_convention &&
            (lower(a->first) == "positive" || lower(b->first) == "positive")) {
            positive = lower(a->first) == "positive" ? a->first : b->first;
        } else if (a->second != b->second) {
            positive = a->second < b->second ? a->first : b->first;
        } else {
            positive = std::max(a->first, b->first);
        }
    }

    Dataset d;
    d.name = std::move(name);
    d.features = std::move(rows);
    d.labels.reserve(raw_labels.size());
    for (const auto& v : raw_labels) d.labels.push_back(v == positive ? 1 : 0);
    return d;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::string& positive_label) {
    std::ifstream in(path);
    if (!in) throw InputError("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw InputError("load_csv: empty file " + path);
    std::vector<std::string> header = split_commas(line);

    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size()) {
        double idx;
        if (parse_real(label_column, idx) && idx >= 0 && idx < double(header.size()))
            label_idx = std::size_t(idx);
        else
            throw InputError("load_csv: no column named '" + label_column + "' in " + path);
    }

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_no;
        std::vector<std::string> cells = split_commas(line);
        if (cells.size() != header.size())
            throw InputError("load_csv: row " + std::to_string(row_no) + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(header.size()));
        std::vector<double> feat;
        feat.reserve(header.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                raw_labels.push_back(cells[c]);
                continue;
            }
            double v;
            if (!parse_real(cells[c], v))
                throw InputError("load_csv: unparsable cell '" + cells[c] + "' at row " +
                                 std::to_string(row_no) + ", column '" + header[c] + "'");
            feat.push_back(v);
        }
        rows.push_back(std::move(feat));
    }
    if (rows.empty()) throw InputError("load_csv: no data rows in " + path);
    return assemble(basename_no_ext(path), std::move(rows), raw_labels, positive_label, false);
}

Dataset load_keel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("load_keel: cannot open " + path);

    std::vector<std::string> attr_names;
    std::string output_attr;
    bool in_data = false;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    std::size_t label_idx = 0;
    std::size_t row_no = 0;

    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (!in_data) {
            if (line[0] != '@')
                throw InputError("load_keel: malformed header line before @data: " + line);
            std::istringstream ls(line);
            std::string tag;
            ls >> tag;
            tag = lower(tag);
            if (tag == "@attribute") {
                std::string name;
                ls >> name;
                // Strip a type glued to the name, as in "name{a,b}" or "name[0,1]".
                std::size_t brk = name.find_first_of("{[");
                if (brk != std::string::npos) name = name.substr(0, brk);
                if (name.empty())
                    throw InputError("load_keel: @attribute without a name in " + path);
                attr_names.push_back(name);
            } else if (tag == "@output" || tag == "@outputs") {
                ls >> output_attr;
            } else if (tag == "@data") {
                in_data = true;
                if (attr_names.empty())
                    throw InputError("load_keel: @data before any @attribute in " + path);
                label_idx = attr_names.size() - 1;
                if (!output_attr.empty()) {
                    auto it = std::find(attr_names.begin(), attr_names.end(), output_attr);
                    if (it == attr_names.end())
                        throw InputError("load_keel: @output names unknown attribute '" +
                                         output_attr + "'");
                    label_idx = std::size_t(it - attr_names.begin());
                }
            }
            // @relation and @inputs carry no information needed here.
            continue;
        }
        ++row_no;
        std::vector<std::string> cells = split_commas(line);
        if (cells.size() != attr_names.size())
            throw InputError("load_keel: row " + std::to_string(row_no) + " has " +
                             std::to_string(cells.size()) + " values, expected " +
                             std::to_string(attr_names.size()));
        std::vector<double> feat;
        feat.reserve(attr_names.size() - 1);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                raw_labels.push_back(cells[c]);
                continue;
            }
            double v;
            if (!parse_real(cells[c], v))
                throw InputError("load_keel: unparsable cell '" + cells[c] + "' at row " +
                                 std::to_string(row_no) + ", attribute '" + attr_names[c] + "'");
            feat.push_back(v);
        }
        rows.push_back(std::move(feat));
    }
    if (!in_data) throw InputError("load_keel: no @data marker in " + path);
    if (rows.empty()) throw InputError("load_keel: no data rows in " + path);
    return assemble(basename_no_ext(path), std::move(rows), raw_labels, "", true);
}

Dataset normalize(const Dataset& d) {
    Dataset out = d;
    std::size_t m = d.attribute_count();
    for (std::size_t c = 0; c < m; ++c) {
        double lo = d.features[0][c], hi = d.features[0][c];
        for (const auto& row : d.features) {
            lo = std::min(lo, row[c]);
            hi = std::max(hi, row[c]);
        }
        for (std::size_t r = 0; r < out.features.size(); ++r)
            out.features[r][c] = (hi == lo) ? 0.5 : (d.features[r][c] - lo) / (hi - lo);
    }
    return out;
}

double imbalance_ratio(const Dataset& d) {
    std::size_t pos = 0;
    for (int y : d.labels) pos += std::size_t(y == 1);
    std::size_t neg = d.labels.size() - pos;
    if (pos == 0 || neg == 0)
        throw InputError(d.name + ": imbalance ratio needs both classes");
    return double(std::max(pos, neg)) / double(std::min(pos, neg));
}

FoldPlan stratified_folds(const Dataset& d, int k, std::uint64_t seed) {
    if (k < 2) throw InputError("stratified_folds: k must be >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < d.labels.size(); ++i)
        (d.labels[i] == 1 ? pos : neg).push_back(i);
    if (pos.size() < std::size_t(k) || neg.size() < std::size_t(k))
        throw InputError("stratified_folds: a class has fewer than k=" + std::to_string(k) +
                         " instances (" + std::to_string(pos.size()) + " positive, " +
                         std::to_string(neg.size()) + " negative)");

    Rng rng(seed);
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(d.labels.size(), 0);
    for (auto* cls : {&pos, &neg}) {
        rng.shuffle(*cls);
        for (std::size_t i = 0; i < cls->size(); ++i)
            plan.assignments[(*cls)[i]] = int(i % std::size_t(k));
    }
    return plan;
}

void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("write_csv: cannot open " + path);
    std::size_t m = d.attribute_count();
    for (std::size_t c = 0; c < m; ++c) out << "a" << c << ",";
    out << "label\n";
    char buf[40];
    for (std::size_t r = 0; r < d.features.size(); ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", d.features[r][c]);
            out << buf << ",";
        }
        out << d.labels[r] << "\n";
    }
}

std::string fold_plan_text(const FoldPlan& p) {
    std::string out;
    for (std::size_t i = 0; i < p.assignments.size(); ++i)
        out += std::to_string(i) + "," + std::to_string(p.assignments[i]) + "\n";
    return out;
}

} // namespace rlf
