#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "eosim/marl/gae.hpp"
#include "eosim/marl/losses.hpp"
#include "eosim/marl/policy.hpp"
#include "eosim/marl/trust_region.hpp"
#include "eosim/marl/update.hpp"
#include "eosim/nn/categorical.hpp"

using namespace eosim;
using namespace eosim::marl;

namespace {

std::vector<double> randn(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1e-6, std::abs(a), std::abs(b)}); }

// Episodes of random length concatenated; the last one is truncated when
// `truncate_last` so a bootstrap tail is present.
TrajectoryBatch random_batch(const PolicySet& ps, std::size_t T, Rng& rng, bool truncate_last = true) {
  std::vector<std::size_t> obs, acts;
  for (const auto& n : ps.actor_nets) {
    obs.push_back(n.input_size());
    acts.push_back(n.output_size());
  }
  const std::size_t S = ps.critic_net.input_size();
  auto b = make_batch(obs, acts, S);
  for (std::size_t t = 0; t < T; ++t) {
    double joint = 0.0;
    for (std::size_t i = 0; i < ps.num_agents(); ++i) {
      auto& a = b.agents[i];
      const auto o = randn(rng, a.obs_size);
      a.observations.insert(a.observations.end(), o.begin(), o.end());
      const nn::Categorical d(ps.actor_nets[i].forward(ps.actors[i], o));
      const auto act = d.sample(rng);
      a.actions.push_back(static_cast<int>(act));
      a.log_probs.push_back(d.log_prob(act));
      joint += d.log_prob(act);
    }
    b.joint_log_probs.push_back(joint);
    const auto s = randn(rng, S);
    b.global_states.insert(b.global_states.end(), s.begin(), s.end());
    b.rewards.push_back(rng.normal(0.5, 1.0));
    const bool end = t + 1 == T || rng.uniform() < 0.1;
    b.dones.push_back(end);
    const bool trunc = end && t + 1 == T && truncate_last;
    b.truncated.push_back(trunc);
    if (trunc) b.tails.emplace_back(t, randn(rng, S));
  }
  b.validate();
  return b;
}

PolicySet team(std::size_t n, bool shared, std::uint64_t seed, std::size_t obs = 5, std::size_t act = 4,
               std::size_t state = 7, std::size_t hidden = 8) {
  Rng rng(seed);
  return make_policy_set(std::vector<AgentShape>(n, AgentShape{obs, act}), n * obs + state, shared, hidden, rng);
}

AlgoConfig small_cfg() {
  AlgoConfig c;
  c.epochs = 3;
  c.minibatches = 2;
  c.lr = 1e-3;
  return c;
}

bool same_weights(const PolicySet& a, const PolicySet& b) {
  return a.actors == b.actors && a.critics == b.critics && a.actor_opt == b.actor_opt && a.critic_opt == b.critic_opt;
}

// Gradient check of f: params -> scalar with gradient written into g.
template <class F>
void check_gradient(const nn::ParamVector& p, F f, double tol = 1e-4) {
  std::vector<double> g(p.size(), 0.0);
  f(p, std::span<double>(g));
  const double h = 1e-5;
  for (std::size_t j = 0; j < p.size(); ++j) {
    std::vector<double> up = p.values(), dn = p.values();
    up[j] += h;
    dn[j] -= h;
    const double fd = (f(nn::ParamVector(up), std::span<double>()) - f(nn::ParamVector(dn), std::span<double>())) / (2 * h);
    CHECK(rel_err(g[j], fd) <= tol);
  }
}

// Dense Gaussian elimination with partial pivoting.
std::vector<double> direct_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    std::swap(A[c], A[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return x;
}

}  // namespace

// ---- GAE ----------------------------------------------------------------------

TEST_CASE("GAE with lambda 0 is the one-step TD residual") {
  const std::vector<double> r{1.0, -0.5, 2.0, 0.3}, v{0.2, 0.4, -0.1, 0.9};
  const std::vector<std::uint8_t> d{0, 0, 0, 1};
  const std::vector<double> boot{0, 0, 0, 0.7};
  const auto est = compute_gae(r, v, d, boot, 0.9, 0.0);
  for (std::size_t t = 0; t < 4; ++t) {
    const double next = t + 1 < 4 ? v[t + 1] : boot[t];
    CHECK(est.advantages[t] == doctest::Approx(r[t] + 0.9 * next - v[t]).epsilon(1e-15));
    CHECK(est.targets[t] == doctest::Approx(est.advantages[t] + v[t]).epsilon(1e-15));
  }
}

TEST_CASE("GAE of zero rewards and values is zero") {
  const std::vector<double> z(10, 0.0);
  std::vector<std::uint8_t> d(10, 0);
  d[4] = d[9] = 1;
  const auto est = compute_gae(z, z, d, z, 0.99, 0.95);
  for (double a : est.advantages) CHECK(a == 0.0);
}

TEST_CASE("GAE matches the brute-force double sum") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = 1 + rng.uniform_int(32);
    const double gamma = trial == 0 ? 0.99 : rng.uniform(0.5, 1.0);
    const double lambda = trial == 0 ? 0.95 : rng.uniform(0.0, 1.0);
    const auto r = randn(rng, T), v = randn(rng, T);
    std::vector<std::uint8_t> d(T, 0);
    std::vector<double> boot(T, 0.0);
    for (std::size_t t = 0; t < T; ++t)
      if (t + 1 == T || rng.uniform() < 0.15) {
        d[t] = 1;
        boot[t] = rng.uniform() < 0.5 ? 0.0 : rng.normal();
      }
    const auto est = compute_gae(r, v, d, boot, gamma, lambda);
    for (std::size_t t = 0; t < T; ++t) {
      double a = 0.0;
      double w = 1.0;
      for (std::size_t k = t; k < T; ++k) {
        const double next = d[k] ? boot[k] : v[k + 1];
        a += w * (r[k] + gamma * next - v[k]);
        if (d[k]) break;
        w *= gamma * lambda;
      }
      CHECK(std::abs(est.advantages[t] - a) <= 1e-10);
    }
  }
}

TEST_CASE("GAE input errors") {
  const std::vector<double> r{1, 2}, v{1};
  const std::vector<std::uint8_t> d{0, 1};
  CHECK_THROWS(compute_gae(r, v, d, r, 0.9, 0.9));
  const std::vector<std::uint8_t> open{0, 0};
  CHECK_THROWS(compute_gae(r, r, open, r, 0.9, 0.9));
}

TEST_CASE("advantage normalisation") {
  std::vector<double> x{1.0, 2.0, 3.0, 10.0};
  normalize(x);
  double m = 0.0, s = 0.0;
  for (double v : x) m += v;
  m /= 4.0;
  for (double v : x) s += (v - m) * (v - m);
  CHECK(std::abs(m) <= 1e-12);
  CHECK(std::sqrt(s / 4.0) == doctest::Approx(1.0).epsilon(1e-6));
  std::vector<double> one{3.0};
  normalize(one);
  CHECK(one[0] == 3.0);
}

// ---- clipped surrogate ----------------------------------------------------------

TEST_CASE("clipped surrogate by hand") {
  CHECK(clipped_surrogate(1.5, 2.0, 0.2) == doctest::Approx(2.4));
  CHECK(clipped_surrogate(0.5, -1.0, 0.2) == doctest::Approx(-0.8));
  CHECK(clipped_surrogate(1.0, 0.7, 0.2) == 0.7);
  CHECK(clipped_surrogate_dratio(1.5, 2.0, 0.2) == 0.0);
  CHECK(clipped_surrogate_dratio(1.1, 2.0, 0.2) == 2.0);
}

TEST_CASE("clipped surrogate bound") {
  Rng rng(2);
  for (int k = 0; k < 10000; ++k) {
    const double r = std::exp(rng.normal()), a = rng.normal(), eps = rng.uniform(0.05, 0.5);
    const double s = clipped_surrogate(r, a, eps);
    CHECK(s <= std::max(r * a, std::clamp(r, 1 - eps, 1 + eps) * a) + 1e-15);
    if (a > 0) CHECK(s <= (1 + eps) * a + 1e-15);
  }
}

TEST_CASE("ratio one everywhere gives the mean advantage") {
  auto ps = team(1, true, 3);
  Rng rng(3);
  const auto b = random_batch(ps, 40, rng);
  const auto adv = randn(rng, b.size());
  const auto idx = all_rows(b.size());
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  CHECK(ppo_loss(ps.actor_nets[0], ps.actors[0], b.agents[0], adv, idx, 0.2, {}) == doctest::Approx(mean).epsilon(1e-12));
  for (double r : probability_ratios(ps.actor_nets[0], ps.actors[0], b.agents[0])) CHECK(r == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("non-finite ratios are refused") {
  auto ps = team(1, true, 4);
  Rng rng(4);
  auto b = random_batch(ps, 10, rng);
  b.agents[0].log_probs[3] = -1e6;  // ratio overflows
  const auto adv = randn(rng, b.size());
  CHECK_THROWS_AS(ppo_loss(ps.actor_nets[0], ps.actors[0], b.agents[0], adv, all_rows(b.size()), 0.2, {}),
                  std::domain_error);
}

// ---- loss gradients -------------------------------------------------------------

TEST_CASE("policy and value objective gradients match finite differences") {
  auto ps = team(1, true, 5, 4, 3, 3, 6);
  Rng rng(5);
  // perturb the actor so behaviour and current policy differ and some samples clip
  auto b = random_batch(ps, 24, rng);
  {
    auto m = ps.actors[0].mutate();
    for (auto& x : m) x += 0.15 * rng.normal();
  }
  const auto& net = ps.actor_nets[0];
  const auto& traj = b.agents[0];
  const auto adv = randn(rng, b.size());
  const auto targets = randn(rng, b.size());
  std::vector<std::size_t> idx{0, 3, 5, 7, 11, 12, 17, 20, 23};

  check_gradient(ps.actors[0], [&](const nn::ParamVector& p, std::span<double> g) {
    return ppo_loss(net, p, traj, adv, idx, 0.2, g);
  });
  check_gradient(ps.actors[0], [&](const nn::ParamVector& p, std::span<double> g) {
    return actor_objective(net, p, traj, adv, idx, 0.2, 0.05, g).surrogate +
           0.05 * entropy_bonus(net, p, traj.obs(), idx, {});
  });
  check_gradient(ps.actors[0], [&](const nn::ParamVector& p, std::span<double> g) {
    return entropy_bonus(net, p, traj.obs(), idx, g);
  });
  check_gradient(ps.actors[0], [&](const nn::ParamVector& p, std::span<double> g) {
    return surrogate(net, p, traj, adv, idx, g);
  });
  std::vector<double> ref;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto z = randn(rng, 3);
    ref.insert(ref.end(), z.begin(), z.end());
  }
  check_gradient(ps.actors[0], [&](const nn::ParamVector& p, std::span<double> g) {
    return mean_kl(net, p, traj.obs(), Rows{ref, 3}, idx, g);
  });
  check_gradient(ps.critics[0], [&](const nn::ParamVector& p, std::span<double> g) {
    return value_loss(ps.critic_net, p, b.states(), targets, idx, g);
  });
  // total loss, both parameter blocks
  check_gradient(ps.actors[0], [&](const nn::ParamVector& p, std::span<double> g) {
    std::vector<double> cg(ps.critics[0].size(), 0.0);
    return total_loss(net, p, ps.critic_net, ps.critics[0], traj, b.states(), adv, targets, idx, 0.2, 0.5, 0.01, g,
                      g.empty() ? std::span<double>() : std::span<double>(cg));
  });
  check_gradient(ps.critics[0], [&](const nn::ParamVector& p, std::span<double> g) {
    std::vector<double> ag(ps.actors[0].size(), 0.0);
    return total_loss(net, ps.actors[0], ps.critic_net, p, traj, b.states(), adv, targets, idx, 0.2, 0.5, 0.01,
                      g.empty() ? std::span<double>() : std::span<double>(ag), g);
  });
}

TEST_CASE("value, entropy and total loss special cases") {
  auto ps = team(1, true, 6);
  Rng rng(6);
  const auto b = random_batch(ps, 30, rng);
  const auto idx = all_rows(b.size());
  const auto v = critic_values(ps.critic_net, ps.critics[0], b);
  CHECK(value_loss(ps.critic_net, ps.critics[0], b.states(), v.values, idx, {}) == 0.0);

  const auto adv = randn(rng, b.size());
  const auto tg = randn(rng, b.size());
  const double surr = ppo_loss(ps.actor_nets[0], ps.actors[0], b.agents[0], adv, idx, 0.2, {});
  CHECK(total_loss(ps.actor_nets[0], ps.actors[0], ps.critic_net, ps.critics[0], b.agents[0], b.states(), adv, tg, idx,
                   0.2, 0.0, 0.0, {}, {}) == surr);

  // zero actor weights: uniform over 11 actions
  nn::Mlp net(nn::actor_spec(5, 11, 8));
  nn::ParamVector zero(std::vector<double>(net.num_params(), 0.0));
  auto traj = b.agents[0];
  traj.action_size = 11;
  CHECK(0.01 * entropy_bonus(net, zero, traj.obs(), idx, {}) == doctest::Approx(0.01 * std::log(11.0)).epsilon(1e-12));
}

// ---- trust region ---------------------------------------------------------------

TEST_CASE("Fisher-vector product against finite differences of the KL gradient") {
  Rng rng(7);
  nn::Mlp net(nn::MlpSpec{{3, 5, 4}});
  REQUIRE(net.num_params() <= 64);
  const auto p = net.init_params(rng, 1.0);
  std::vector<double> obs;
  for (int k = 0; k < 12; ++k) {
    auto o = randn(rng, 3);
    obs.insert(obs.end(), o.begin(), o.end());
  }
  const Rows rows{obs, 3};
  const auto idx = all_rows(12);
  const FisherOperator F(net, p, rows, idx);
  const Rows ref = F.ref_logits();

  const std::size_t n = net.num_params();
  std::vector<std::vector<double>> H(n, std::vector<double>(n));
  const double h = 1e-5;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> up = p.values(), dn = p.values();
    up[j] += h;
    dn[j] -= h;
    std::vector<double> gu(n, 0.0), gd(n, 0.0);
    mean_kl(net, nn::ParamVector(up), rows, ref, idx, gu);
    mean_kl(net, nn::ParamVector(dn), rows, ref, idx, gd);
    for (std::size_t i = 0; i < n; ++i) H[i][j] = (gu[i] - gd[i]) / (2 * h);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const auto v = randn(rng, n);
    const auto fv = F.apply(v, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double hv = 0.0;
      for (std::size_t j = 0; j < n; ++j) hv += H[i][j] * v[j];
      worst = std::max(worst, std::abs(hv - fv[i]));
    }
    CHECK(worst <= 1e-6);
  }

  const std::vector<double> zero(n, 0.0);
  for (double x : F.apply(zero, 0.1)) CHECK(x == 0.0);

  const auto v1 = randn(rng, n), v2 = randn(rng, n);
  std::vector<double> mix(n);
  for (std::size_t i = 0; i < n; ++i) mix[i] = 2.5 * v1[i] - 0.7 * v2[i];
  const auto f1 = F.apply(v1, 0.1), f2 = F.apply(v2, 0.1), fm = F.apply(mix, 0.1);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(fm[i] - (2.5 * f1[i] - 0.7 * f2[i])) <= 1e-9);

  const auto direct = fisher_vector_product(net, p, rows, idx, v1, 0.1);
  CHECK(direct == f1);
}

TEST_CASE("conjugate gradient on simple operators") {
  const std::vector<double> g{1.0, -2.0, 3.0};
  const auto id = conjugate_gradient([](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); },
                                     g, 10, 1e-12);
  CHECK(id.iterations == 1);
  CHECK(id.x == g);
  const auto two = conjugate_gradient(
      [](std::span<const double> v) {
        std::vector<double> o(v.begin(), v.end());
        for (auto& x : o) x *= 2.0;
        return o;
      },
      g, 10, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) CHECK(two.x[i] == doctest::Approx(g[i] / 2.0).epsilon(1e-15));
}

TEST_CASE("conjugate gradient matches a direct solve") {
  Rng rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 20;
    std::vector<std::vector<double>> M(n, std::vector<double>(n)), A(n, std::vector<double>(n, 0.0));
    for (auto& row : M)
      for (auto& x : row) x = rng.normal();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) A[i][j] += M[k][i] * M[k][j];
        if (i == j) A[i][j] += 1.0;
      }
    const auto b = randn(rng, n);
    const auto op = [&](std::span<const double> v) {
      std::vector<double> o(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) o[i] += A[i][j] * v[j];
      return o;
    };
    const auto cg = conjugate_gradient(op, b, 200, 1e-14);
    const auto x = direct_solve(A, b);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += (cg.x[i] - x[i]) * (cg.x[i] - x[i]);
      den += x[i] * x[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-8);
    CHECK_FALSE(cg.breakdown);
  }
}

TEST_CASE("conjugate gradient reports breakdown on indefinite operators") {
  const std::vector<double> b{1.0, 1.0};
  const auto r = conjugate_gradient(
      [](std::span<const double> v) { return std::vector<double>{v[0], -v[1]}; }, b, 10, 1e-12);
  CHECK(r.breakdown);
  for (double x : r.x) CHECK(std::isfinite(x));
}

TEST_CASE("trust-region step size") {
  CHECK(trust_region_step_size(0.01, 0.08) == doctest::Approx(0.5));
  CHECK(trust_region_step_size(0.01, 0.02) == doctest::Approx(1.0));
  CHECK(trust_region_step_size(0.01, 0.0) == 0.0);
  CHECK(trust_region_step_size(0.01, -1.0) == 0.0);
}

// ---- updaters -------------------------------------------------------------------

TEST_CASE("single-agent MAPPO and HAPPO reduce to PPO bit for bit") {
  Rng brng(9);
  const auto base = team(1, true, 10);
  const auto b = random_batch(base, 64, brng);
  const auto cfg = small_cfg();

  auto p_ppo = base, p_mappo = base, p_happo = base;
  p_happo.shared_critic = false;
  Rng r1(77), r2(77), r3(77);
  ppo_update(p_ppo, b, cfg, r1);
  mappo_update(p_mappo, b, cfg, r2);
  happo_update(p_happo, b, cfg, r3);
  CHECK(p_ppo.actors != base.actors);
  CHECK(same_weights(p_ppo, p_mappo));
  CHECK(same_weights(p_ppo, p_happo));
  CHECK(r1 == r2);
  CHECK(r1 == r3);
}

TEST_CASE("single-agent HATRPO reduces to TRPO bit for bit") {
  Rng brng(11);
  const auto base = team(1, true, 12);
  const auto b = random_batch(base, 64, brng);
  const auto cfg = small_cfg();
  auto a = base, c = base;
  c.shared_critic = false;
  Rng r1(5), r2(5);
  const auto ma = trpo_update(a, b, cfg, r1);
  const auto mc = hatrpo_update(c, b, cfg, r2);
  REQUIRE(ma.trust_region.size() == 1);
  CHECK(ma.trust_region[0].accepted);
  CHECK(same_weights(a, c));
  CHECK(ma.trust_region[0].kl == mc.trust_region[0].kl);
}

TEST_CASE("zero advantages leave actors unchanged without entropy") {
  auto ps = team(2, true, 13);
  for (auto& c : ps.critics) c.assign(std::vector<double>(c.size(), 0.0));  // V = 0
  Rng brng(13);
  auto b = random_batch(ps, 32, brng, false);
  std::fill(b.rewards.begin(), b.rewards.end(), 0.0);
  auto cfg = small_cfg();
  cfg.entropy_coef = 0.0;
  const auto before = ps.actors;
  Rng rng(1);
  mappo_update(ps, b, cfg, rng);
  CHECK(ps.actors == before);

  auto hps = team(2, false, 14);
  for (auto& c : hps.critics) c.assign(std::vector<double>(c.size(), 0.0));
  Rng b2(2);
  auto hb = random_batch(hps, 32, b2, false);
  std::fill(hb.rewards.begin(), hb.rewards.end(), 0.0);
  const auto hbefore = hps.actors;
  const auto m = hatrpo_update(hps, hb, cfg, rng);
  CHECK(hps.actors == hbefore);
  for (const auto& ev : m.trust_region) {
    CHECK_FALSE(ev.accepted);
    CHECK(ev.kl == 0.0);
  }
}

TEST_CASE("symmetric agents get identical MAPPO updates") {
  auto ps = team(2, true, 15);
  ps.actors[1] = nn::ParamVector(ps.actors[0].values());
  Rng brng(15);
  auto b = random_batch(ps, 48, brng);
  b.agents[1] = b.agents[0];
  Rng rng(3);
  mappo_update(ps, b, small_cfg(), rng);
  CHECK(ps.actors[0] == ps.actors[1]);
  CHECK(ps.actor_opt[0] == ps.actor_opt[1]);
}

TEST_CASE("compound ratio is neutral when earlier ratios are one") {
  // agent 0 has a single action, so its ratio is exactly one whatever it learns
  Rng init(16);
  const std::vector<AgentShape> shapes{{5, 1}, {5, 4}};
  const auto base = make_policy_set(shapes, 17, false, 8, init);
  Rng brng(16);
  const auto b = random_batch(base, 48, brng);
  bool saw_agent0_first = false;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto on = base, off = base;
    auto c_on = small_cfg(), c_off = small_cfg();
    c_off.compound_ratio = false;
    Rng r1(seed), r2(seed);
    const auto m = happo_update(on, b, c_on, r1);
    happo_update(off, b, c_off, r2);
    saw_agent0_first |= m.order[0] == 0;
    CHECK(same_weights(on, off));
  }
  CHECK(saw_agent0_first);
}

TEST_CASE("compound ratio changes later agents otherwise") {
  const auto base = team(2, false, 17);
  Rng brng(17);
  const auto b = random_batch(base, 48, brng);
  auto on = base, off = base;
  auto c_off = small_cfg();
  c_off.compound_ratio = false;
  Rng r1(4), r2(4);
  const auto m = happo_update(on, b, small_cfg(), r1);
  happo_update(off, b, c_off, r2);
  const std::size_t first = m.order[0], second = m.order[1];
  CHECK(on.actors[first] == off.actors[first]);
  CHECK(on.actors[second] != off.actors[second]);
}

TEST_CASE("HAPPO and HATRPO orders are seeded permutations") {
  const auto base = team(3, false, 18);
  Rng brng(18);
  const auto b = random_batch(base, 30, brng);
  std::set<std::vector<std::size_t>> orders;
  for (std::uint64_t s = 0; s < 12; ++s) {
    auto ps = base;
    Rng r(s);
    auto m = happo_update(ps, b, small_cfg(), r);
    auto sorted = m.order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2});
    orders.insert(m.order);
    auto again = base;
    Rng r2(s);
    CHECK(happo_update(again, b, small_cfg(), r2).order == m.order);
  }
  CHECK(orders.size() > 1);
}

TEST_CASE("accepted trust-region steps respect the KL radius") {
  std::size_t accepted = 0, within = 0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    auto ps = team(3, false, 100 + s);
    AlgoConfig cfg = small_cfg();
    Rng brng(200 + s), rng(s);
    for (int u = 0; u < 3; ++u) {
      const auto b = random_batch(ps, 80, brng);
      const auto before = ps.actors;
      const auto m = hatrpo_update(ps, b, cfg, rng);
      for (const auto& ev : m.trust_region) {
        if (!ev.accepted) {
          CHECK(ps.actors[ev.agent] == before[ev.agent]);
          continue;
        }
        ++accepted;
        // independent KL measurement
        const auto& net = ps.actor_nets[ev.agent];
        const auto& traj = b.agents[ev.agent];
        double kl = 0.0;
        for (std::size_t t = 0; t < b.size(); ++t) {
          const nn::Categorical p_old(net.forward(before[ev.agent], traj.obs()[t]));
          const nn::Categorical p_new(net.forward(ps.actors[ev.agent], traj.obs()[t]));
          kl += p_old.kl(p_new);
        }
        kl /= static_cast<double>(b.size());
        CHECK(kl == doctest::Approx(ev.kl).epsilon(1e-9));
        CHECK(kl <= 1.5 * cfg.kl_delta);
        within += kl <= cfg.kl_delta;
        CHECK(ev.improvement > 0.0);
      }
    }
  }
  REQUIRE(accepted > 0);
  CHECK(static_cast<double>(within) >= 0.95 * static_cast<double>(accepted));
}

TEST_CASE("critic regression on a frozen batch is monotone at small lr") {
  auto ps = team(1, true, 19);
  Rng brng(19);
  const auto b = random_batch(ps, 64, brng);
  const auto targets = randn(brng, b.size());
  const auto idx = all_rows(b.size());
  nn::AdamConfig cfg;
  cfg.lr = 1e-4;
  double prev = value_loss(ps.critic_net, ps.critics[0], b.states(), targets, idx, {});
  const double first = prev;
  for (int e = 0; e < 100; ++e) {
    std::vector<double> g(ps.critics[0].size(), 0.0);
    value_loss(ps.critic_net, ps.critics[0], b.states(), targets, idx, g);
    nn::adam_step(ps.critics[0], g, ps.critic_opt[0], cfg);
    const double now = value_loss(ps.critic_net, ps.critics[0], b.states(), targets, idx, {});
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
  CHECK(prev < first);
}

TEST_CASE("updaters reject mismatched inputs") {
  auto ps = team(2, true, 20);
  Rng brng(20);
  const auto b = random_batch(ps, 16, brng);
  Rng rng(0);
  CHECK_THROWS(ppo_update(ps, b, small_cfg(), rng));
  CHECK_THROWS(happo_update(ps, b, small_cfg(), rng));
  auto single = team(1, true, 21);
  CHECK_THROWS(mappo_update(single, b, small_cfg(), rng));
  AlgoConfig bad;
  bad.gamma = 1.5;
  CHECK_THROWS(bad.validate());
  bad = AlgoConfig{};
  bad.kl_delta = 0.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("minibatch split") {
  std::vector<std::size_t> perm(10);
  for (std::size_t i = 0; i < 10; ++i) perm[i] = 9 - i;
  const auto parts = split_minibatches(perm, 4);
  REQUIRE(parts.size() == 4);
  CHECK(parts[0].size() == 3);
  CHECK(parts[1].size() == 3);
  CHECK(parts[2].size() == 2);
  CHECK(parts[3].size() == 2);
  CHECK(parts[0][0] == 9);
}

TEST_CASE("algorithm config JSON round trip") {
  AlgoConfig c;
  c.lr = 1e-3;
  c.compound_ratio = false;
  const auto back = algo_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK_THROWS(algo_config_from_json(nlohmann::json{{"learning_rate", 0.1}}));
  CHECK(algorithm_from_string("hatrpo") == Algorithm::kHatrpo);
  CHECK_THROWS(algorithm_from_string("sac"));
}
