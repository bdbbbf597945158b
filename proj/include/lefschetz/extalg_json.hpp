#pragma once
// JSON round-trip for complex-double forms:
//   {"p":…, "q":…, "n":…, "terms":[{"I":[…],"J":[…],"re":…,"im":…}]}

#include "json.hpp"
#include "lefschetz/extalg.hpp"

namespace lefschetz::alg {

nlohmann::ordered_json form_to_json(const BigradedForm<Cplx>& u);
BigradedForm<Cplx> form_from_json(const nlohmann::json& j);

}  // namespace lefschetz::alg
