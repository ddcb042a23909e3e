#include "cutplane/actions.hpp"

#include <cmath>
#include <sstream>

#include "cutplane/errors.hpp"

namespace cutplane {

void apply_action(Mat& A, Vec& w, const UpdateAction& act) {
  if (const auto* u = std::get_if<WeightUpdate>(&act)) {
    if (u->w.size() != w.size()) throw ArgumentError("weight update has the wrong length");
    require_positive(u->w, "weight update");
    w = u->w;
  } else if (const auto* ins = std::get_if<InsertRow>(&act)) {
    if (ins->a.size() != A.cols()) throw ArgumentError("inserted row has the wrong length");
    if (!(ins->weight > 0.0)) throw ArgumentError("inserted row needs a positive weight");
    const Eigen::Index m = A.rows();
    A.conservativeResize(m + 1, Eigen::NoChange);
    A.row(m) = ins->a.transpose();
    w.conservativeResize(m + 1);
    w[m] = ins->weight;
  } else {
    const int i = std::get<DeleteRow>(act).index;
    const int m = static_cast<int>(A.rows());
    if (i < 0 || i >= m) throw ArgumentError("delete index out of range");
    const int tail = m - 1 - i;
    A.middleRows(i, tail) = A.bottomRows(tail).eval();
    A.conservativeResize(m - 1, Eigen::NoChange);
    w.segment(i, tail) = w.tail(tail).eval();
    w.conservativeResize(m - 1);
  }
}

void check_action(const Mat& A, const Vec& w, const UpdateAction& act,
                  const AssumptionLimits& lim) {
  std::ostringstream msg;
  if (const auto* u = std::get_if<WeightUpdate>(&act)) {
    if (u->w.size() != w.size()) throw AssumptionViolation("weight update has the wrong length");
    require_positive(u->w, "weight update");
    const double step = (u->w.array().log() - w.array().log()).matrix().norm();
    if (step > lim.max_log_step + lim.slack) {
      msg << "weight update moves log w by " << step << " > " << lim.max_log_step;
      throw AssumptionViolation(msg.str());
    }
  } else if (const auto* ins = std::get_if<InsertRow>(&act)) {
    if (ins->a.size() != A.cols()) throw AssumptionViolation("inserted row has the wrong length");
    GramFactor g(A, w);
    const double lev = ins->weight * ins->a.dot(g.solve(ins->a));
    if (lev > lim.max_row_leverage + lim.slack) {
      msg << "inserted row has leverage " << lev << " > " << lim.max_row_leverage;
      throw AssumptionViolation(msg.str());
    }
  } else {
    const int i = std::get<DeleteRow>(act).index;
    if (i < 0 || i >= A.rows()) throw AssumptionViolation("delete index out of range");
    if (A.rows() - 1 < A.cols()) throw AssumptionViolation("delete would leave fewer rows than columns");
    GramFactor g(A, w);
    const Vec a = A.row(i).transpose();
    const double lev = w[i] * a.dot(g.solve(a));
    if (lev > lim.max_row_leverage + lim.slack) {
      msg << "deleted row has leverage " << lev << " > " << lim.max_row_leverage;
      throw AssumptionViolation(msg.str());
    }
  }
}

void check_sequence(const Mat& A, const Vec& w, const ActionSequence& acts,
                    const AssumptionLimits& lim) {
  if (static_cast<int>(acts.size()) > lim.max_actions)
    throw AssumptionViolation("action sequence longer than the configured cap");
  Mat Ak = A;
  Vec wk = w;
  for (const auto& act : acts) {
    check_action(Ak, wk, act, lim);
    apply_action(Ak, wk, act);
  }
}

}  // namespace cutplane
