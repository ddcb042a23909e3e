#pragma once

#include <variant>
#include <vector>

#include "cutplane/linalg.hpp"

namespace cutplane {

struct WeightUpdate {
  Vec w;
};

struct InsertRow {
  Vec a;
  double weight = 1.0;
};

struct DeleteRow {
  int index = 0;
};

using UpdateAction = std::variant<WeightUpdate, InsertRow, DeleteRow>;
using ActionSequence = std::vector<UpdateAction>;

// Short-sequence / small-update contract for action streams.
struct AssumptionLimits {
  double max_log_step = 0.01;
  double max_row_leverage = 0.01;
  int max_actions = 64;
  double slack = 1e-9;
};

// Applies one action in place: inserts append, deletes shift later rows up.
void apply_action(Mat& A, Vec& w, const UpdateAction& act);

// Throws AssumptionViolation when the action is too large for (A, w).
void check_action(const Mat& A, const Vec& w, const UpdateAction& act,
                  const AssumptionLimits& lim);
void check_sequence(const Mat& A, const Vec& w, const ActionSequence& acts,
                    const AssumptionLimits& lim);

}  // namespace cutplane
