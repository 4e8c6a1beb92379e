#pragma once

#include <span>
#include <string>

namespace graph_forest {

/// Micro-aggregated counts over all classes.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

ConfusionCounts confusion_counts(std::span<const int> pred, std::span<const int> truth);

/// Micro-averaged F1. For single-label prediction every miss is one false
/// positive and one false negative, so this equals accuracy.
double micro_f1(std::span<const int> pred, std::span<const int> truth);

/// Training F1 minus test F1; negative when the test split scores higher.
inline double overfit_gap(double train_f1, double test_f1) { return train_f1 - test_f1; }

enum class BackboneKind { graphsage, fastgcn, clustergcn };

BackboneKind parse_backbone(const std::string& name);

/// Inputs to the asymptotic cost model. Counts are unit-free; fractions lie in (0, 1].
struct CostInputs {
  double layers = 3;       // l
  double k = 1;            // base models
  double n = 1;            // nodes
  double m = 1;            // edges
  double alpha = 1;        // node sampling fraction
  double alpha_star = 1;   // fraction of edges kept by node sampling
  double d = 1;            // feature dim
  double beta = 1;         // feature sampling fraction
  double batch = 1;        // b
  double r = 1;            // sampled neighbors per node
};

struct CostEstimate {
  BackboneKind kind;
  double time_units;
  double space_units;
};

/// Evaluates the big-O bodies of the ensemble complexity table with unit
/// constants. With k = 1 and all fractions 1 this is the single-model cost.
CostEstimate cost_estimate(BackboneKind kind, const CostInputs& in);

}  // namespace graph_forest
