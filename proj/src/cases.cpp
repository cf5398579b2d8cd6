#include "tid/cases.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "tid/text_format.hpp"

namespace tid {

Assignment Case::flattened() const {
    Assignment out;
    for (const auto& r : records) out[slice_id(r.variable, r.slice)] = r.state;
    return out;
}

CaseSet simulate(const TemporalNetwork& net, int count, uint64_t seed) {
    if (count < 1) throw InferenceError("case count must be >= 1");
    const Network& flat = net.flattened;
    flat.require_valid();
    auto order = flat.topological_order();
    auto gen = seed_stream(seed, "simulate");

    CaseSet out;
    out.cases.reserve(count);
    for (int c = 0; c < count; ++c) {
        Case item;
        char buf[16];
        std::snprintf(buf, sizeof buf, "c%04d", c + 1);
        item.id = buf;

        Assignment sampled;
        for (size_t idx : order) {
            const Node& node = flat.nodes()[idx];
            if (node.kind != NodeKind::chance) continue;
            long row = flat.row_index(node, sampled);
            int s = sample_categorical(node.cpt->rows[row], gen);
            sampled[node.id()] = node.variable.states[s];
            auto [var, slice] = split_slice_id(node.id());
            item.records.push_back({slice, var, node.variable.states[s]});
        }
        std::sort(item.records.begin(), item.records.end(),
                  [](const CaseRecord& a, const CaseRecord& b) {
                      if (a.slice != b.slice) return a.slice < b.slice;
                      return a.variable < b.variable;
                  });
        out.cases.push_back(std::move(item));
    }
    return out;
}

std::string write_cases(const CaseSet& cases) {
    std::ostringstream os;
    os << "case_id, slice, variable, state\n";
    for (const auto& item : cases.cases)
        for (const auto& r : item.records)
            os << item.id << ", " << r.slice << ", " << r.variable << ", "
               << r.state << "\n";
    return os.str();
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (true) {
        size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(trim(line.substr(pos)));
            break;
        }
        out.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return out;
}

}  // namespace

CaseSet parse_cases(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    bool header_seen = false;
    CaseSet out;
    Case* current = nullptr;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split_csv(t);
        if (!header_seen) {
            if (fields != std::vector<std::string>{"case_id", "slice",
                                                   "variable", "state"})
                throw FormatError(
                    "case file must start with the header "
                    "'case_id, slice, variable, state'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 4)
            throw FormatError("line " + std::to_string(line_no) +
                              ": expected 4 fields");
        if (!current || current->id != fields[0]) {
            out.cases.emplace_back();
            current = &out.cases.back();
            current->id = fields[0];
        }
        CaseRecord r;
        try {
            r.slice = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw FormatError("line " + std::to_string(line_no) +
                              ": bad slice index '" + fields[1] + "'");
        }
        if (r.slice < 0)
            throw FormatError("line " + std::to_string(line_no) +
                              ": negative slice index");
        r.variable = fields[2];
        r.state = fields[3];
        current->records.push_back(std::move(r));
    }
    if (!header_seen)
        throw FormatError("case file is empty (missing header)");
    return out;
}

CaseSet load_cases(const std::string& path) {
    return parse_cases(read_file(path));
}

void save_cases(const CaseSet& cases, const std::string& path) {
    write_file(path, write_cases(cases));
}

CaseView split_case(const Case& item, const Network& flattened,
                    const std::vector<std::string>& query_vars,
                    int target_slice) {
    bool net_has_findings = false;
    for (const auto& n : flattened.nodes())
        if (n.variable.tag == VariableTag::finding) net_has_findings = true;

    std::set<std::string> target_ids;
    for (const auto& q : query_vars)
        target_ids.insert(slice_id(q, target_slice));

    CaseView view;
    for (const auto& r : item.records) {
        std::string id = slice_id(r.variable, r.slice);
        if (!flattened.has_node(id)) continue;  // variable outside this model
        if (target_ids.count(id)) {
            view.target[id] = r.state;
            continue;
        }
        if (!net_has_findings ||
            flattened.node(id).variable.tag == VariableTag::finding)
            view.evidence.set(id, r.state);
    }
    for (const auto& id : target_ids)
        if (!view.target.count(id))
            throw InferenceError("case '" + item.id +
                                 "' does not record target '" + id + "'");
    return view;
}

}  // namespace tid
