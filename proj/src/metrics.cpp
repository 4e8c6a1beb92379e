#include "graph_forest/metrics.hpp"

#include <cmath>

#include "graph_forest/common.hpp"

namespace graph_forest {

ConfusionCounts confusion_counts(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw InvalidArgument("micro_f1: prediction/truth length mismatch");
  if (pred.empty()) throw InvalidArgument("micro_f1: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) {
      ++c.tp;
    } else {
      ++c.fp;
      ++c.fn;
    }
  }
  return c;
}

double micro_f1(std::span<const int> pred, std::span<const int> truth) {
  const ConfusionCounts c = confusion_counts(pred, truth);
  if (c.tp == 0) return 0.0;
  const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  return 2.0 * precision * recall / (precision + recall);
}

BackboneKind parse_backbone(const std::string& name) {
  if (name == "graphsage") return BackboneKind::graphsage;
  if (name == "fastgcn") return BackboneKind::fastgcn;
  if (name == "clustergcn") return BackboneKind::clustergcn;
  throw InvalidArgument("unknown backbone kind '" + name + "'");
}

CostEstimate cost_estimate(BackboneKind kind, const CostInputs& in) {
  for (double x : {in.layers, in.k, in.n, in.m, in.d, in.batch, in.r}) {
    if (!(x > 0)) throw InvalidArgument("cost_estimate: counts must be positive");
  }
  for (double f : {in.alpha, in.alpha_star, in.beta}) {
    if (!(f > 0 && f <= 1)) throw InvalidArgument("cost_estimate: fractions must lie in (0, 1]");
  }
  const double l = in.layers;
  const double nodes = in.alpha * in.n;
  const double dims = in.beta * in.d;
  const double rl = std::pow(in.r, l);

  CostEstimate e{kind, 0, 0};
  switch (kind) {
    case BackboneKind::graphsage:
      e.time_units = in.k * rl * nodes * dims * dims;
      e.space_units = in.k * (in.batch * rl * dims + l * dims * dims);
      break;
    case BackboneKind::fastgcn:
      e.time_units = in.k * in.r * l * nodes * dims * dims;
      e.space_units = in.k * (in.batch * in.r * l * dims + l * dims * dims);
      break;
    case BackboneKind::clustergcn:
      e.time_units = in.k * (l * in.alpha_star * in.m * dims + l * nodes * dims * dims);
      e.space_units = in.k * (in.batch * l * dims + l * dims * dims);
      break;
  }
  return e;
}

}  // namespace graph_forest
