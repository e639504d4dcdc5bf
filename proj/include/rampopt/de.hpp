#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace rampopt {

struct DeOptions {
  double mutation = 0.7;   // differential weight
  double crossover = 0.5;  // per-coordinate mixing probability
  int population = 0;      // 0 picks max(10, 3 * dimension)
};

// rand/1/bin differential evolution on the unit cube, run one proposal at a
// time so it can share an evaluation budget with other strategies. The
// population starts as a seeded Latin hypercube; members are evaluated
// lazily (the first 'population' proposals are the members themselves).
// Selection is greedy per target slot and is driven by tell(): a proposal
// replaces its target when its cost is strictly lower, or when the target
// only ever failed while the proposal succeeded.
class DifferentialEvolution {
 public:
  DifferentialEvolution(int dimension, const DeOptions& opts, std::uint64_t seed);

  struct Proposal {
    Eigen::VectorXd x;
    int target = -1;
    bool from_init = false;  // an initial member awaiting its first cost
  };

  // Draws the next proposal. 'call_seed' fully determines the randomness of
  // this call. While no member has a successful evaluation (and the initial
  // sweep is over), proposals are fresh uniform samples instead of mutants.
  Proposal propose(std::uint64_t call_seed);

  // Records the evaluated cost for a proposal. Failed evaluations must be
  // handed in with a substituted cost and valid=false.
  void tell(const Proposal& proposal, double cost, bool valid);

  int dimension() const { return static_cast<int>(members_.rows()); }
  int population() const { return static_cast<int>(members_.cols()); }
  bool initializing() const { return init_cursor_ < population(); }
  bool any_valid() const;
  const Eigen::MatrixXd& members() const { return members_; }
  double member_cost(int i) const { return cost_[static_cast<std::size_t>(i)]; }

 private:
  Eigen::MatrixXd members_;  // dimension x population
  std::vector<double> cost_;
  std::vector<char> valid_;
  DeOptions opts_;
  int init_cursor_ = 0;
  int target_cursor_ = 0;
};

}  // namespace rampopt
