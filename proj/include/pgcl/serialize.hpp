#pragma once

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

#include "pgcl/chain.hpp"
#include "pgcl/oracle.hpp"
#include "pgcl/rules.hpp"
#include "pgcl/strengthen.hpp"

namespace pgcl {

using Json = nlohmann::ordered_json;

// {"exact": "1/2", "decimal": "0.50000000000000000000"}; infinity is "inf".
Json value_json(const ExtRat& v);
Json table_json(const Table& t);
Table table_from_json(const Json& j);

Json condition_json(const SideCondition& c);
Json request_json(const CertifyRequest& r);
CertifyRequest request_from_json(const Json& j);
// Includes the request so the certificate can be replayed.
Json certificate_json(const Certificate& c, const CertifyRequest& r);

struct Replay {
  bool matches = false;
  std::string detail;  // first differing path when it does not match
};

// Reruns the certification recorded in the certificate and compares the
// resulting document with the stored one.
Replay replay_certificate(const Json& certificate);

Json estimate_json(const Estimate& e);
Json outcome_json(const SimOutcome& o);

// Strengthening configuration:
//   {"bounds": [{"var": "n", "op": "<", "c": "M"} | {"expr": "abs(x)", ...}],
//    "conjuncts": ["x != y"], "guard": "replacement guard",
//    "sweep": {"param": "M", "from": 5, "to": 40, "step": 5}
//           | {"param": "M", "values": [5, 10, 20, 40]}
//           | {"param": "M", "from": 2, "to": 64, "factor": 2}}
StrengthenTemplate template_from_json(const Json& j);
std::string sweep_param(const Json& j);
std::vector<Rational> sweep_values(const Json& j);

// Accepts numbers or strings ("1/3", "0.001").
Rational rational_from_json(const Json& j);

// Substitutes numeric parameters for `{expr}` placeholders, e.g.
// "n=-2..{M+2}" with M = 10 gives "n=-2..12".
std::string fill_placeholders(const std::string& text, const std::map<std::string, Rational>& params);

}  // namespace pgcl
