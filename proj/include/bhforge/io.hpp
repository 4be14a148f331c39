#pragma once

// Sequence dumps (JSON lines), collision reports and scan CSV.

#include "bhforge/collisions.hpp"
#include "bhforge/encoding.hpp"
#include "bhforge/tuple_analysis.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace bhforge {

using Json = nlohmann::json;

struct SequenceDump {
    int h = 2;
    ExactRational alpha{1};
    int k_min = 0;
    int k_max = 0;
    std::vector<EncodedElement> elements;
};

inline Json dump_header(const ShellConfig& cfg, int k_min, int k_max) {
    const auto poly = cfg.c_poly();
    return Json{{"h", cfg.h},
                {"alpha", cfg.alpha.str()},
                {"c_poly", Json::array({poly[0], poly[1], poly[2]})},
                {"K_range", Json::array({k_min, k_max})}};
}

inline Json element_json(const EncodedElement& e) {
    return Json{{"K", e.K}, {"a", e.prime.a}, {"b_im", e.prime.b}, {"norm", e.prime.norm}, {"b_hex", to_hex(e.b)}};
}

inline void write_sequence_dump(std::ostream& os, const ShellConfig& cfg, int k_min, int k_max,
                                const std::vector<EncodedElement>& elements) {
    os << dump_header(cfg, k_min, k_max).dump() << '\n';
    for (const auto& e : elements) os << element_json(e).dump() << '\n';
}

/// Parses a dump and rebuilds each element from its b value.
inline SequenceDump read_sequence_dump(std::istream& is) {
    SequenceDump d;
    std::string line;
    if (!std::getline(is, line)) throw MalformedEncoding("empty sequence dump");
    try {
        const Json head = Json::parse(line);
        d.h = head.at("h").get<int>();
        d.alpha = ExactRational::parse(head.at("alpha").get<std::string>());
        d.k_min = head.at("K_range").at(0).get<int>();
        d.k_max = head.at("K_range").at(1).get<int>();
        ShellConfig cfg = make_config(d.h, d.alpha);
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            const Json rec = Json::parse(line);
            GaussianPrime p{rec.at("a").get<std::uint64_t>(), rec.at("b_im").get<std::uint64_t>(),
                            rec.at("norm").get<std::uint64_t>()};
            if (BigInt(p.a) * p.a + BigInt(p.b) * p.b != p.norm) throw MalformedEncoding("a^2 + b^2 != norm");
            const BigInt b = from_hex(rec.at("b_hex").get<std::string>());
            BlockVector bv = decode_element(cfg, b);
            if (bv.K != rec.at("K").get<int>()) throw MalformedEncoding("recorded K disagrees with the marker bit");
            if (bv.K < d.k_min || bv.K > d.k_max) throw MalformedEncoding("element outside the header K_range");
            d.elements.push_back(encode_blocks(p, std::move(bv), cfg.d()));
        }
    } catch (const Json::exception& e) {
        throw MalformedEncoding(std::string("sequence dump: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw MalformedEncoding(std::string("sequence dump: ") + e.what());
    }
    return d;
}

inline Json collision_json(const CollisionRecord& r) {
    Json left = Json::array(), right = Json::array();
    for (const auto& e : r.left) left.push_back(element_json(e));
    for (const auto& e : r.right) right.push_back(element_json(e));
    return Json{{"l", r.l}, {"shells", r.shells}, {"left", left}, {"right", right}};
}

inline Json certificate_json(const BadTupleCertificate& c) {
    Json near = Json::array();
    for (auto v : c.checks.near_integer) near.push_back(to_string(v));
    return Json{{"record", collision_json(c.record)},
                {"valid", c.valid()},
                {"precision_bits", c.profile.precision_bits},
                {"checks",
                 {{"shell_matching", to_string(c.checks.shell_matching)},
                  {"truncation_equality", to_string(c.checks.truncation_equality)},
                  {"omega_small", to_string(c.checks.omega_small)},
                  {"omega_gap", to_string(c.checks.omega_gap)},
                  {"shell_inequality", to_string(c.checks.shell_inequality)},
                  {"near_integer", near}}}};
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
    os << "alpha_num,alpha_den,K,l,count,undecided,budget_flag\n";
    for (const auto& r : rows)
        os << r.alpha.num() << ',' << r.alpha.den() << ',' << r.K << ',' << r.l << ',' << r.count << ',' << r.undecided
           << ',' << (r.budget_flag ? 1 : 0) << '\n';
}

}  // namespace bhforge
