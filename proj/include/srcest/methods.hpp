#pragma once

#include <array>
#include <string>
#include <string_view>

#include "srcest/baselines.hpp"
#include "srcest/errors.hpp"
#include "srcest/general_estimator.hpp"
#include "srcest/graph.hpp"
#include "srcest/si_model.hpp"
#include "srcest/tree_estimator.hpp"
#include "srcest/trees.hpp"

namespace srcest {

enum class Method { jce, rg, oracle, dc, cc, bc };

inline constexpr std::array<Method, 6> kAllMethods{Method::jce, Method::rg, Method::oracle,
                                                   Method::dc,  Method::cc, Method::bc};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::jce: return "jce";
    case Method::rg: return "rg";
    case Method::oracle: return "oracle";
    case Method::dc: return "dc";
    case Method::cc: return "cc";
    case Method::bc: return "bc";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : kAllMethods) {
    if (method_name(m) == s) return m;
  }
  throw ArgumentError("unknown method '" + std::string(s) + "' (expected jce, rg, oracle, dc, cc or bc)");
}

struct EstimateOptions {
  GeneralEstimatorOptions general;
};

// One estimate by any method. Tree-only methods raise StructureError on
// graphs whose V_e component has a cycle.
inline SourceEstimate estimate_source(const Graph& g, const ObservationSet& ve, const SIParams<double>& params,
                                      Method method, const EstimateOptions& options = {}) {
  switch (method) {
    case Method::jce: return jce_on_tree(g, ve).estimate;
    case Method::rg:
    case Method::oracle: {
      GeneralEstimatorOptions o = options.general;
      o.method = method == Method::oracle ? GeneralMethod::oracle : GeneralMethod::reverse_greedy;
      return estimate_source_general(g, ve, params, o).estimate;
    }
    case Method::dc: return distance_center(g, ve);
    case Method::cc: return closeness_center(g, ve);
    case Method::bc: return betweenness_center(g, ve);
  }
  throw InternalError("unhandled method");
}

}  // namespace srcest
