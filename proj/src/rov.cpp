#include "rovwl/rov.hpp"

#include <algorithm>
#include <charconv>

#include <json.hpp>

namespace rovwl {

const char* to_string(Validity v) {
    switch (v) {
        case Validity::Valid: return "valid";
        case Validity::Invalid: return "invalid";
        case Validity::Unknown: return "unknown";
    }
    return "?";
}

RoaIndex RoaIndex::build(const std::vector<Vrp>& vrps) {
    RoaIndex idx;
    idx.all_ = vrps;
    std::sort(idx.all_.begin(), idx.all_.end());
    idx.all_.erase(std::unique(idx.all_.begin(), idx.all_.end()), idx.all_.end());
    for (const Vrp& v : idx.all_) {
        idx.trie_.at(v.prefix).push_back(v);
    }
    idx.count_ = idx.all_.size();
    return idx;
}

std::vector<Vrp> RoaIndex::covering(const Prefix& p) const {
    std::vector<Vrp> out;
    for (const auto* bucket : trie_.covering(p)) {
        out.insert(out.end(), bucket->begin(), bucket->end());
    }
    return out;
}

RpkiStatus RoaIndex::validate(const Announcement& ann) const {
    RpkiStatus st;
    st.matched_vrps = covering(ann.prefix);
    if (st.matched_vrps.empty()) {
        st.validity = Validity::Unknown;
        return st;
    }
    st.validity = Validity::Invalid;
    for (const Vrp& v : st.matched_vrps) {
        if (v.asn == ann.origin && v.max_length >= ann.prefix.length()) {
            st.validity = Validity::Valid;
            break;
        }
    }
    return st;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

VrpParseResult parse_vrp_csv(std::string_view text) {
    VrpParseResult res;
    size_t line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.find("ASN") != std::string_view::npos &&
            line.find("Prefix") != std::string_view::npos)
            continue;  // header
        auto cols = split(line, ',');
        if (cols.size() < 3) {
            res.diagnostics.push_back({line_no, "expected at least 3 columns"});
            continue;
        }
        auto asn = parse_asn(trim(cols[0]));
        if (!asn) {
            res.diagnostics.push_back({line_no, "bad ASN"});
            continue;
        }
        auto prefix = Prefix::parse(trim(cols[1]));
        if (!prefix) {
            res.diagnostics.push_back({line_no, "bad prefix"});
            continue;
        }
        auto ml_sv = trim(cols[2]);
        unsigned ml = 0;
        auto [p, ec] = std::from_chars(ml_sv.data(), ml_sv.data() + ml_sv.size(), ml);
        if (ec != std::errc{} || p != ml_sv.data() + ml_sv.size()) {
            res.diagnostics.push_back({line_no, "bad max length"});
            continue;
        }
        if (ml < prefix->length() || ml > prefix->family_max_length()) {
            res.diagnostics.push_back({line_no, "max length out of range"});
            continue;
        }
        res.vrps.push_back(Vrp{*asn, *prefix, static_cast<uint8_t>(ml)});
    }
    return res;
}

std::string to_vrp_csv(const std::vector<Vrp>& vrps) {
    std::vector<Vrp> sorted = vrps;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::string out = "ASN,IP Prefix,Max Length,Trust Anchor\n";
    for (const Vrp& v : sorted) {
        out += std::to_string(v.asn.value);
        out += ',';
        out += v.prefix.str();
        out += ',';
        out += std::to_string(v.max_length);
        out += ",\n";
    }
    return out;
}

AnnouncementParseResult parse_announcements_jsonl(std::string_view text) {
    AnnouncementParseResult res;
    size_t line_no = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            res.diagnostics.push_back({line_no, "not a JSON object"});
            continue;
        }
        Announcement ann;
        if (!obj.contains("ts") || !obj["ts"].is_number_integer()) {
            res.diagnostics.push_back({line_no, "missing integer ts"});
            continue;
        }
        ann.ts = obj["ts"].get<int64_t>();
        if (!obj.contains("prefix") || !obj["prefix"].is_string()) {
            res.diagnostics.push_back({line_no, "missing prefix"});
            continue;
        }
        auto prefix = Prefix::parse(obj["prefix"].get<std::string>());
        if (!prefix) {
            res.diagnostics.push_back({line_no, "bad prefix"});
            continue;
        }
        ann.prefix = *prefix;
        if (!obj.contains("as_path") || !obj["as_path"].is_array() ||
            obj["as_path"].empty()) {
            res.diagnostics.push_back({line_no, "missing or empty as_path"});
            continue;
        }
        bool bad_path = false;
        for (const auto& hop : obj["as_path"]) {
            if (!hop.is_number_integer() || hop.get<int64_t>() < 0 ||
                hop.get<int64_t>() > 0xffffffffLL) {
                bad_path = true;  // AS_SET or junk element
                break;
            }
            ann.as_path.push_back(Asn{hop.get<uint32_t>()});
        }
        if (bad_path) {
            res.diagnostics.push_back({line_no, "as_path element is not a plain ASN"});
            continue;
        }
        ann.origin = ann.as_path.back();
        if (obj.contains("peer_asn") && obj["peer_asn"].is_number_integer()) {
            ann.peer = Asn{obj["peer_asn"].get<uint32_t>()};
        }
        res.announcements.push_back(std::move(ann));
    }
    return res;
}

std::string to_announcements_jsonl(const std::vector<Announcement>& anns) {
    std::string out;
    for (const Announcement& a : anns) {
        nlohmann::json obj;
        obj["ts"] = a.ts;
        if (a.peer) obj["peer_asn"] = a.peer->value;
        obj["prefix"] = a.prefix.str();
        auto& path = obj["as_path"] = nlohmann::json::array();
        for (Asn hop : a.as_path) path.push_back(hop.value);
        out += obj.dump();
        out += '\n';
    }
    return out;
}

}  // namespace rovwl
