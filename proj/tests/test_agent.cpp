#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "dmca/agent/agent.hpp"
#include "dmca/nn/grad_check.hpp"
#include "dmca/util/errors.hpp"
#include "doctest.h"

using namespace dmca;
using namespace dmca::agent;

namespace {

std::string temp_file(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

AgentHyperParams small_hp() {
  AgentHyperParams hp;
  hp.hidden = 4;
  hp.replay_capacity = 64;
  hp.critic_batch = 4;
  hp.minibatch = 8;
  hp.episodes = 2;
  hp.max_steps = 10;
  return hp;
}

nn::Vec vec(std::initializer_list<double> xs) {
  nn::Vec v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Transition make_tr(nn::Vec s, nn::Vec a, double r, nn::Vec s_next,
                   nn::Vec s_pred, double conf) {
  Transition t;
  t.state = std::move(s);
  t.action = std::move(a);
  t.reward = r;
  t.next_state = std::move(s_next);
  t.predicted_next_state = std::move(s_pred);
  t.confidence = conf;
  return t;
}

// Wires the target critic into a pass-through of the first state entry:
// Q'(s, a) = relu(relu(s[0])), exactly s[0] for s[0] >= 0.
void make_target_critic_passthrough(Agent& ag) {
  nn::ParamRefs ps = ag.target_critic_net().params();
  for (nn::Param* p : ps) p->value.setZero();
  ps[0]->value(0, 0) = 1.0;  // first hidden layer weight
  ps[2]->value(0, 0) = 1.0;  // second hidden layer weight
  ps[4]->value(0, 0) = 1.0;  // output layer weight
}

// Overwrites the online critic with Q(s, a) = -|a - 0.5| (state ignored).
void make_critic_vee(Agent& ag) {
  nn::ParamRefs ps = ag.critic_net().params();
  for (nn::Param* p : ps) p->value.setZero();
  ps[0]->value(0, 1) = 1.0;   // input is [state, action]
  ps[0]->value(1, 1) = -1.0;
  ps[1]->value(0, 0) = -0.5;
  ps[1]->value(1, 0) = 0.5;
  ps[2]->value.setIdentity();
  ps[4]->value(0, 0) = -1.0;
  ps[4]->value(0, 1) = -1.0;
}

env::EnvConfig generous_env_config(int horizon = 0) {
  env::EnvConfig cfg;
  cfg.channel.channels = 2;
  cfg.channel.bandwidth_hz = 2.0;  // per channel: 1 Hz, 1 mW, noise 1 mW
  cfg.channel.power_mw = 2.0;
  cfg.channel.noise_mw = 1.0;
  cfg.user_slots = 1;
  cfg.real_users = 1;
  cfg.mode = env::StreamingMode::kLive;
  cfg.sensitivities = {0.7};
  cfg.req_xi_min = 0.3;
  cfg.req_xi_max = 1.1;
  cfg.horizon = horizon;
  cfg.seed = 11;
  return cfg;
}

// Constant gain 10 on both channels: rate = log2(101) per channel, far above
// any requirement the generator can produce, so rewards stay positive.
env::ChannelTrace generous_trace(int slots) {
  env::ChannelTrace t;
  t.gains = Eigen::MatrixXd::Constant(slots, 2, 10.0);
  t.sample_rate_hz = 1.0;
  return t;
}

struct FixedSource : env::PredictionSource {
  int h = 1;
  double gain0 = 1.0, gain1 = std::sqrt(3.0), conf = 0.25;
  int horizon() const override { return h; }
  double predicted_gain(int, int, int channel) const override {
    return channel == 0 ? gain0 : gain1;
  }
  double confidence(int) const override { return conf; }
};

}  // namespace

TEST_CASE("hyperparameter validation") {
  CHECK_NOTHROW(AgentHyperParams{}.validate());

  auto bad = [](auto mutate) {
    AgentHyperParams hp;
    mutate(hp);
    return hp;
  };
  CHECK_THROWS_AS(bad([](auto& h) { h.discount = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.discount = 1.0001; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.tau_soft = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.replay_capacity = 10; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.critic_batch = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.minibatch = 16; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.episodes = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.max_steps = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.horizon = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.actor_lr = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.critic_lr = -1.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.hidden = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.ou_theta = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.ou_sigma = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.stop_consecutive = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.min_episode_steps = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](auto& h) { h.train_lag = -1; }).validate(), ConfigError);
  // discount 1 is allowed (undiscounted)
  CHECK_NOTHROW(bad([](auto& h) { h.discount = 1.0; }).validate());
}

TEST_CASE("replay buffer evicts strictly oldest-first") {
  ReplayBuffer buf(3);
  CHECK(buf.capacity() == 3);
  CHECK(buf.size() == 0);

  auto tr = [](double r) {
    return make_tr(vec({0.0}), vec({0.0}), r, vec({0.0}), vec({0.0}), 0.0);
  };
  buf.push(tr(1));
  buf.push(tr(2));
  CHECK(buf.size() == 2);
  CHECK(buf.at(0).reward == 1.0);
  CHECK(buf.at(1).reward == 2.0);

  buf.push(tr(3));
  buf.push(tr(4));
  buf.push(tr(5));
  CHECK(buf.size() == 3);
  CHECK(buf.at(0).reward == 3.0);  // 1 and 2 evicted
  CHECK(buf.at(1).reward == 4.0);
  CHECK(buf.at(2).reward == 5.0);

  CHECK_THROWS_AS(buf.at(3), StateError);
  CHECK_THROWS_AS(buf.at(-1), StateError);
  CHECK_THROWS_AS(ReplayBuffer(0), ConfigError);
}

TEST_CASE("replay sampling is uniform without replacement") {
  ReplayBuffer buf(16);
  for (int i = 0; i < 10; ++i)
    buf.push(make_tr(vec({0.0}), vec({0.0}), i, vec({0.0}), vec({0.0}), 0.0));
  std::mt19937_64 rng(3);

  SUBCASE("a full draw covers every element exactly once") {
    const auto all = buf.sample(10, rng);
    std::set<double> rewards;
    for (const Transition* t : all) rewards.insert(t->reward);
    CHECK(rewards.size() == 10);
    CHECK(*rewards.begin() == 0.0);
    CHECK(*rewards.rbegin() == 9.0);
  }
  SUBCASE("partial draws contain no duplicates") {
    for (int trial = 0; trial < 50; ++trial) {
      const auto some = buf.sample(4, rng);
      std::set<const Transition*> seen(some.begin(), some.end());
      CHECK(seen.size() == 4);
    }
  }
  SUBCASE("oversized and empty draws are rejected") {
    CHECK_THROWS_AS(buf.sample(11, rng), StateError);
    CHECK_THROWS_AS(buf.sample(0, rng), ConfigError);
  }
}

TEST_CASE("exploration noise relaxes toward its mean") {
  OuNoise noise(2, 0.15, 0.0, 0.0, 1);
  noise.set_value(vec({1.0, -2.0}));

  noise.step();
  CHECK(noise.value()[0] == 1.0 + 0.15 * (0.0 - 1.0));  // 0.85
  CHECK(noise.value()[1] == -2.0 + 0.15 * (0.0 - -2.0));
  CHECK(noise.value()[0] == doctest::Approx(0.85).epsilon(1e-15));
  noise.step();
  CHECK(noise.value()[0] == doctest::Approx(0.7225).epsilon(1e-12));

  noise.reset();
  CHECK(noise.value()[0] == 0.0);
  CHECK(noise.value()[1] == 0.0);

  SUBCASE("state injection validates the dimension") {
    CHECK_THROWS_AS(noise.set_value(vec({1.0})), StateError);
  }
  SUBCASE("zero theta keeps a pure mean process") {
    OuNoise flat(1, 0.0, 0.0, 0.7, 1);
    CHECK(flat.value()[0] == 0.7);
    flat.step();
    CHECK(flat.value()[0] == 0.7);
  }
  SUBCASE("same seed gives the same sample path") {
    OuNoise a(3, 0.15, 0.2, 0.0, 9);
    OuNoise b(3, 0.15, 0.2, 0.0, 9);
    for (int i = 0; i < 20; ++i) CHECK(a.step() == b.step());
  }
  SUBCASE("construction validates parameters") {
    CHECK_THROWS_AS(OuNoise(0, 0.15, 0.2, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(OuNoise(1, -0.1, 0.2, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(OuNoise(1, 0.15, -0.2, 0.0, 1), ConfigError);
  }
}

TEST_CASE("network factories and target copies") {
  Agent ag(3, 2, small_hp(), 17);
  CHECK(ag.state_dim() == 3);
  CHECK(ag.action_dim() == 2);
  CHECK(ag.actor_net().in_dim() == 3);
  CHECK(ag.actor_net().out_dim() == 2);
  CHECK(ag.critic_net().in_dim() == 5);
  CHECK(ag.critic_net().out_dim() == 1);

  const nn::Vec s = vec({0.2, -0.4, 0.9});
  const nn::Vec a = ag.act(s);
  CHECK(a.size() == 2);
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a[i] > 0.0);  // sigmoid head
    CHECK(a[i] < 1.0);
  }
  CHECK_THROWS_AS(ag.act(vec({1.0, 2.0})), StateError);

  SUBCASE("targets start as exact copies of the online nets") {
    CHECK(ag.target_actor_net().forward(s) == a);
    const nn::Vec act = vec({0.3, 0.6});
    CHECK(ag.target_critic_value(s, act) == ag.critic(s, act));
  }
  SUBCASE("state and action concatenate in that order") {
    const nn::Vec x = concat_state_action(vec({1.0, 2.0}), vec({3.0}));
    CHECK(x.size() == 3);
    CHECK(x[0] == 1.0);
    CHECK(x[1] == 2.0);
    CHECK(x[2] == 3.0);
  }
  SUBCASE("deterministic actions repeat and leave no tape behind") {
    const nn::Vec again = ag.act(s);
    CHECK(again == a);
    // Nothing was recorded, so there is nothing to backpropagate through.
    CHECK_THROWS_AS(ag.actor_net().backward(vec({1.0, 1.0})), StateError);
  }
}

TEST_CASE("learning target blends realized and predicted next values") {
  AgentHyperParams hp = small_hp();
  hp.hidden = 2;
  hp.discount = 0.92;

  Agent ag(2, 1, hp, 5);
  make_target_critic_passthrough(ag);

  // Pass-through check: the target critic reads off s[0].
  CHECK(ag.target_critic_value(vec({2.0, 0.0}), vec({0.7})) == 2.0);
  CHECK(ag.target_critic_value(vec({3.0, -4.0}), vec({0.1})) == 3.0);

  std::vector<Transition> own;
  own.reserve(4);  // pointers into the vector must survive later pushes
  own.push_back(make_tr(vec({0.0, 0.0}), vec({0.5}), 1.0, vec({2.0, 0.0}),
                        vec({3.0, 0.0}), 0.5));
  std::vector<const Transition*> batch = {&own[0]};

  SUBCASE("the predicted branch carries no discount by default") {
    const auto y = ag.pddpg_targets(batch);
    REQUIRE(y.size() == 1);
    CHECK(y[0] == 1.0 + (1.0 - 0.5) * 0.92 * 2.0 + 0.5 * 3.0);
    CHECK(y[0] == doctest::Approx(3.42).epsilon(1e-12));
  }
  SUBCASE("optionally the predicted branch is discounted too") {
    AgentHyperParams hp2 = hp;
    hp2.discount_predicted = true;
    Agent ag2(2, 1, hp2, 5);
    make_target_critic_passthrough(ag2);
    const auto y = ag2.pddpg_targets(batch);
    CHECK(y[0] == 1.0 + (1.0 - 0.5) * 0.92 * 2.0 + 0.5 * 0.92 * 3.0);
    CHECK(y[0] == doctest::Approx(3.30).epsilon(1e-12));
  }
  SUBCASE("zero confidence skips the predicted branch entirely") {
    own[0].confidence = 0.0;
    own[0].predicted_next_state =
        vec({std::numeric_limits<double>::quiet_NaN(),
             std::numeric_limits<double>::quiet_NaN()});
    const auto y = ag.pddpg_targets(batch);
    CHECK(std::isfinite(y[0]));
    CHECK(y[0] == 1.0 + 0.92 * 2.0);
  }
  SUBCASE("full confidence drops the realized branch weight to zero") {
    own[0].confidence = 1.0;
    const auto y = ag.pddpg_targets(batch);
    CHECK(y[0] == 4.0);  // 1 + 0*discount*2 + 1*3
  }
  SUBCASE("batches map transition-wise") {
    own.push_back(make_tr(vec({0.0, 0.0}), vec({0.2}), -1.0, vec({5.0, 0.0}),
                          vec({7.0, 0.0}), 0.25));
    batch.push_back(&own[1]);
    const auto y = ag.pddpg_targets(batch);
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(3.42).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(-1.0 + 0.75 * 0.92 * 5.0 + 0.25 * 7.0).epsilon(1e-12));
  }
}

TEST_CASE("zero confidence reduces the target to the plain bootstrap") {
  Agent ag(3, 2, small_hp(), 21);
  std::vector<Transition> own;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 6; ++i) {
    nn::Vec s(3), a(2), s2(3);
    for (int j = 0; j < 3; ++j) s[j] = u(rng);
    for (int j = 0; j < 2; ++j) a[j] = 0.5 + 0.4 * u(rng);
    for (int j = 0; j < 3; ++j) s2[j] = u(rng);
    own.push_back(make_tr(s, a, u(rng), s2, nn::Vec::Zero(3), 0.0));
  }
  std::vector<const Transition*> batch;
  for (const auto& t : own) batch.push_back(&t);

  const auto y = ag.pddpg_targets(batch);
  REQUIRE(y.size() == own.size());
  for (std::size_t i = 0; i < own.size(); ++i) {
    const nn::Vec a_next = ag.target_actor_net().forward(own[i].next_state);
    const double expect =
        own[i].reward +
        (1.0 - 0.0) * ag.hyper().discount *
            ag.target_critic_value(own[i].next_state, a_next);
    CHECK(y[i] == expect);
  }
}

TEST_CASE("critic gradients match finite differences") {
  AgentHyperParams hp = small_hp();
  hp.critic_lr = 1e-300;  // keep parameters effectively frozen
  hp.grad_clip = 0.0;     // leave raw gradients in place
  Agent ag(3, 2, hp, 33);

  std::vector<Transition> own;
  own.push_back(make_tr(vec({0.4, -0.2, 0.7}), vec({0.3, 0.8}), 0.0,
                        vec({0.0, 0.0, 0.0}), nn::Vec::Zero(3), 0.0));
  own.push_back(make_tr(vec({-0.5, 0.1, 0.2}), vec({0.6, 0.2}), 0.0,
                        vec({0.0, 0.0, 0.0}), nn::Vec::Zero(3), 0.0));
  own.push_back(make_tr(vec({0.9, 0.3, -0.6}), vec({0.1, 0.5}), 0.0,
                        vec({0.0, 0.0, 0.0}), nn::Vec::Zero(3), 0.0));
  std::vector<const Transition*> batch;
  for (const auto& t : own) batch.push_back(&t);
  const std::vector<double> targets = {0.3, -0.2, 0.5};

  const double inv_n = 1.0 / 3.0;
  auto loss_fn = [&]() {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double err = ag.critic(batch[i]->state, batch[i]->action) - targets[i];
      loss += err * err * inv_n;
    }
    return loss;
  };
  double reported = 0.0;
  auto grad_fn = [&]() { return reported = ag.update_critic(batch, targets); };

  const double err = nn::grad_check(ag.critic_net().params(), loss_fn, grad_fn);
  CHECK(err < 1e-4);
  CHECK(reported == doctest::Approx(loss_fn()).epsilon(1e-9));

  SUBCASE("batch and target sizes must agree") {
    CHECK_THROWS_AS(ag.update_critic(batch, {1.0}), StateError);
    CHECK_THROWS_AS(ag.update_critic({}, {}), StateError);
  }
}

TEST_CASE("actor gradients match finite differences") {
  AgentHyperParams hp = small_hp();
  hp.actor_lr = 1e-300;
  hp.critic_lr = 1e-300;
  hp.grad_clip = 0.0;
  Agent ag(2, 2, hp, 8);

  std::vector<Transition> own;
  own.push_back(make_tr(vec({0.4, -0.2}), vec({0.5, 0.5}), 0.0,
                        vec({0.0, 0.0}), nn::Vec::Zero(2), 0.0));
  own.push_back(make_tr(vec({-0.7, 0.9}), vec({0.5, 0.5}), 0.0,
                        vec({0.0, 0.0}), nn::Vec::Zero(2), 0.0));
  own.push_back(make_tr(vec({0.1, 0.3}), vec({0.5, 0.5}), 0.0,
                        vec({0.0, 0.0}), nn::Vec::Zero(2), 0.0));
  std::vector<const Transition*> batch;
  for (const auto& t : own) batch.push_back(&t);

  auto loss_fn = [&]() {
    double value = 0.0;
    for (const Transition* t : batch)
      value += ag.critic(t->state, ag.act(t->state));
    return -value / static_cast<double>(batch.size());  // the update ascends
  };
  double reported_norm = 0.0;
  auto grad_fn = [&]() {
    reported_norm = ag.update_actor(batch);
    return 0.0;
  };

  const double err = nn::grad_check(ag.actor_net().params(), loss_fn, grad_fn);
  CHECK(err < 1e-4);

  SUBCASE("the returned norm is of the unclipped actor gradient") {
    ag.update_actor(batch);
    double norm = 0.0;
    for (const nn::Param* p : ag.actor_net().params())
      norm += p->grad.squaredNorm();
    CHECK(reported_norm > 0.0);
    CHECK(std::sqrt(norm) == doctest::Approx(reported_norm).epsilon(1e-9));
  }
  SUBCASE("empty batches are rejected") {
    CHECK_THROWS_AS(ag.update_actor({}), StateError);
  }
}

TEST_CASE("critic regression moves toward fixed targets") {
  AgentHyperParams hp = small_hp();
  hp.hidden = 8;
  hp.critic_lr = 1e-2;
  Agent ag(3, 2, hp, 12);

  std::vector<Transition> own;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> targets;
  for (int i = 0; i < 16; ++i) {
    nn::Vec s(3), a(2);
    for (int j = 0; j < 3; ++j) s[j] = u(rng);
    for (int j = 0; j < 2; ++j) a[j] = 0.5 + 0.4 * u(rng);
    own.push_back(make_tr(s, a, 0.0, nn::Vec::Zero(3), nn::Vec::Zero(3), 0.0));
    targets.push_back(u(rng));
  }
  std::vector<const Transition*> batch;
  for (const auto& t : own) batch.push_back(&t);

  SUBCASE("repeated steps shrink the loss") {
    const double first = ag.update_critic(batch, targets);
    double last = first;
    for (int it = 0; it < 200; ++it) last = ag.update_critic(batch, targets);
    CHECK(first > 0.0);
    CHECK(last < 0.2 * first);
  }
  SUBCASE("targets equal to the outputs leave the critic untouched") {
    std::vector<double> exact;
    for (const Transition* t : batch)
      exact.push_back(ag.critic(t->state, t->action));
    std::vector<Eigen::MatrixXd> before;
    for (const nn::Param* p : ag.critic_net().params()) before.push_back(p->value);
    const double loss = ag.update_critic(batch, exact);
    CHECK(loss == 0.0);
    const nn::ParamRefs ps = ag.critic_net().params();
    for (std::size_t i = 0; i < ps.size(); ++i) CHECK(ps[i]->value == before[i]);
  }
  SUBCASE("non-finite losses skip the step and clear the gradients") {
    std::vector<double> poisoned = targets;
    poisoned[3] = std::numeric_limits<double>::infinity();
    std::vector<Eigen::MatrixXd> before;
    for (const nn::Param* p : ag.critic_net().params()) before.push_back(p->value);
    const double loss = ag.update_critic(batch, poisoned);
    CHECK(!std::isfinite(loss));
    const nn::ParamRefs ps = ag.critic_net().params();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(ps[i]->value == before[i]);
      CHECK(ps[i]->grad.isZero(0.0));
    }
  }
}

TEST_CASE("actor climbs a known value surface to its peak") {
  AgentHyperParams hp = small_hp();
  hp.hidden = 2;
  hp.actor_lr = 0.01;
  hp.grad_clip = 0.0;
  Agent ag(1, 1, hp, 3);
  make_critic_vee(ag);

  // The handcrafted critic scores -|a - 0.5| regardless of the state.
  CHECK(ag.critic(vec({0.3}), vec({0.5})) == 0.0);
  CHECK(ag.critic(vec({0.3}), vec({0.9})) == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK(ag.critic(vec({-2.0}), vec({0.1})) == doctest::Approx(-0.4).epsilon(1e-12));

  std::vector<Transition> own;
  for (double s : {0.1, 0.5, 0.9})
    own.push_back(make_tr(vec({s}), vec({0.5}), 0.0, vec({0.0}), nn::Vec::Zero(1), 0.0));
  std::vector<const Transition*> batch;
  for (const auto& t : own) batch.push_back(&t);

  std::vector<Eigen::MatrixXd> critic_before;
  for (const nn::Param* p : ag.critic_net().params()) critic_before.push_back(p->value);

  double worst_start = 0.0;
  for (const Transition* t : batch)
    worst_start = std::max(worst_start, std::abs(ag.act(t->state)[0] - 0.5));
  for (int it = 0; it < 800; ++it) ag.update_actor(batch);
  double worst_end = 0.0;
  for (const Transition* t : batch)
    worst_end = std::max(worst_end, std::abs(ag.act(t->state)[0] - 0.5));

  CHECK(worst_end < 0.02);
  CHECK(worst_end < worst_start);

  // Policy updates must not leak into the critic weights.
  const nn::ParamRefs ps = ag.critic_net().params();
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(ps[i]->value == critic_before[i]);
}

TEST_CASE("soft target updates blend the online nets in") {
  AgentHyperParams hp = small_hp();
  hp.tau_soft = 0.01;
  Agent ag(2, 1, hp, 2);

  std::vector<Eigen::MatrixXd> actor_t_before, critic_t_before;
  for (const nn::Param* p : ag.target_actor_net().params())
    actor_t_before.push_back(p->value);
  for (const nn::Param* p : ag.target_critic_net().params())
    critic_t_before.push_back(p->value);

  for (nn::Param* p : ag.actor_net().params()) p->value.array() += 1.0;
  for (nn::Param* p : ag.critic_net().params()) p->value.array() += 2.0;
  ag.soft_update_targets();

  const nn::ParamRefs at = ag.target_actor_net().params();
  const nn::ParamRefs at_on = ag.actor_net().params();
  for (std::size_t i = 0; i < at.size(); ++i) {
    const Eigen::MatrixXd expect =
        actor_t_before[i] + 0.01 * (at_on[i]->value - actor_t_before[i]);
    CHECK((at[i]->value - expect).cwiseAbs().maxCoeff() < 1e-15);
  }
  const nn::ParamRefs ct = ag.target_critic_net().params();
  for (std::size_t i = 0; i < ct.size(); ++i) {
    const Eigen::MatrixXd expect = critic_t_before[i].array() + 0.02;
    CHECK((ct[i]->value - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("noisy actions stay inside the decodable range") {
  AgentHyperParams hp = small_hp();
  hp.ou_sigma = 5.0;  // wild noise to slam both clamp bounds
  Agent ag(2, 3, hp, 19);
  const nn::Vec s = vec({0.3, -0.8});

  int clamped = 0;
  for (int i = 0; i < 200; ++i) {
    const nn::Vec a = ag.act_noisy(s);
    for (int j = 0; j < a.size(); ++j) {
      CHECK(a[j] >= 1e-6);
      CHECK(a[j] <= 1.0 - 1e-6);
      if (a[j] == 1e-6 || a[j] == 1.0 - 1e-6) ++clamped;
    }
  }
  CHECK(clamped > 0);

  SUBCASE("with the noise disabled the deterministic policy comes through") {
    AgentHyperParams quiet = small_hp();
    quiet.ou_sigma = 0.0;
    quiet.ou_theta = 0.0;
    Agent still(2, 3, quiet, 19);
    CHECK(still.act_noisy(s) == still.act(s));
  }
}

TEST_CASE("training runs episodes with the advertised stopping rules") {
  env::Environment e(generous_env_config(), generous_trace(200));
  reward::RewardParams rp;

  AgentHyperParams hp = small_hp();
  hp.episodes = 4;
  hp.max_steps = 6;
  hp.stop_reward = 1e9;  // never triggers
  hp.minibatch = 8;
  hp.critic_batch = 4;

  SUBCASE("episodes run to the step cap when the stop rule never fires") {
    Agent ag(e.state_dim(), e.user_slots(), hp, 23);
    const auto log = ag.train(e, 0, e.slots(), rp);
    REQUIRE(log.size() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK(log[i].episode == i);
      CHECK(log[i].steps == 6);
      CHECK(!log[i].truncated);
      CHECK(log[i].mean_reward > 0.0);  // generous channels, no collisions
      CHECK(log[i].final_reward > 0.0);
      CHECK(log[i].rho_mean == 0.0);  // no prediction source
    }
    CHECK(ag.buffer().size() == 24);
  }
  SUBCASE("a sustained high reward ends the episode early") {
    hp.max_steps = 50;
    hp.stop_reward = 0.1;  // always exceeded here
    hp.stop_consecutive = 3;
    hp.min_episode_steps = 4;
    Agent ag(e.state_dim(), e.user_slots(), hp, 23);
    const auto log = ag.train(e, 0, e.slots(), rp);
    for (const auto& st : log) {
      CHECK(st.steps == 4);  // min length dominates the run-of-3 rule
      CHECK(!st.truncated);
    }
  }
  SUBCASE("hitting the span edge truncates the episode") {
    hp.max_steps = 50;
    Agent ag(e.state_dim(), e.user_slots(), hp, 23);
    const auto log = ag.train(e, 0, 4, rp);  // starts drawn from {0, 1, 2}
    for (const auto& st : log) {
      CHECK(st.truncated);
      CHECK(st.steps <= 3);
    }
  }
  SUBCASE("a decision lag tightens the feasible starts") {
    hp.train_lag = 3;
    Agent ag(e.state_dim(), e.user_slots(), hp, 23);
    env::Environment tight(generous_env_config(), generous_trace(12));
    // Starts are capped at slots-2-lag = 7; every step stays on the trace.
    const auto log = ag.train(tight, 3, tight.slots(), rp);
    REQUIRE(log.size() == 4);
    for (const auto& st : log) CHECK(st.steps >= 1);
  }
  SUBCASE("span validation") {
    Agent ag(e.state_dim(), e.user_slots(), hp, 23);
    CHECK_THROWS_AS(ag.train(e, 0, e.slots() + 1, rp), ConfigError);
    CHECK_THROWS_AS(ag.train(e, 10, 11, rp), ConfigError);
    hp.train_lag = 2;
    Agent lagged(e.state_dim(), e.user_slots(), hp, 23);
    CHECK_THROWS_AS(lagged.train(e, 1, e.slots(), rp), ConfigError);
  }
  SUBCASE("the environment must match the agent dimensions") {
    Agent wrong_state(e.state_dim() + 1, e.user_slots(), hp, 23);
    CHECK_THROWS_AS(wrong_state.train(e, 0, e.slots(), rp), ConfigError);
    AgentHyperParams hp2 = hp;
    Agent wrong_users(e.state_dim(), e.user_slots() + 1, hp2, 23);
    CHECK_THROWS_AS(wrong_users.train(e, 0, e.slots(), rp), ConfigError);
  }
}

TEST_CASE("identical seeds reproduce the same training run") {
  reward::RewardParams rp;
  AgentHyperParams hp = small_hp();
  hp.episodes = 3;
  hp.max_steps = 12;
  hp.minibatch = 8;
  hp.critic_batch = 4;
  hp.stop_reward = 1e9;

  env::Environment e1(generous_env_config(), generous_trace(100));
  env::Environment e2(generous_env_config(), generous_trace(100));
  Agent a1(e1.state_dim(), e1.user_slots(), hp, 41);
  Agent a2(e2.state_dim(), e2.user_slots(), hp, 41);

  const auto log1 = a1.train(e1, 0, e1.slots(), rp);
  const auto log2 = a2.train(e2, 0, e2.slots(), rp);
  REQUIRE(log1.size() == log2.size());
  for (std::size_t i = 0; i < log1.size(); ++i) {
    CHECK(log1[i].steps == log2[i].steps);
    CHECK(log1[i].mean_reward == log2[i].mean_reward);
    CHECK(log1[i].final_reward == log2[i].final_reward);
    CHECK(log1[i].rho_mean == log2[i].rho_mean);
    CHECK(log1[i].truncated == log2[i].truncated);
  }
  const nn::Vec probe = vec({1.0, 0.5, 2.0});
  CHECK(a1.act(probe) == a2.act(probe));

  SUBCASE("a different seed diverges") {
    env::Environment e3(generous_env_config(), generous_trace(100));
    Agent a3(e3.state_dim(), e3.user_slots(), hp, 42);
    const auto log3 = a3.train(e3, 0, e3.slots(), rp);
    bool any_different = a3.act(probe) != a1.act(probe);
    for (std::size_t i = 0; i < std::min(log1.size(), log3.size()); ++i)
      if (log3[i].mean_reward != log1[i].mean_reward) any_different = true;
    CHECK(any_different);
  }
}

TEST_CASE("transitions recorded during training carry prediction data") {
  FixedSource source;
  env::EnvConfig cfg = generous_env_config(1);
  env::Environment e(cfg, generous_trace(60));
  e.set_prediction_source(&source);
  reward::RewardParams rp;

  AgentHyperParams hp = small_hp();
  hp.episodes = 1;
  hp.max_steps = 5;
  hp.minibatch = 32;  // larger than the step count: no updates happen
  hp.replay_capacity = 64;
  hp.critic_batch = 4;
  hp.stop_reward = 1e9;

  Agent ag(e.state_dim(), e.user_slots(), hp, 31);
  const auto log = ag.train(e, 0, e.slots(), rp);
  REQUIRE(log.size() == 1);
  CHECK(log[0].steps >= 1);  // the random start may sit near the trace edge
  CHECK(log[0].steps <= 5);
  CHECK(log[0].rho_mean == doctest::Approx(0.25).epsilon(1e-15));
  REQUIRE(ag.buffer().size() == log[0].steps);

  for (int i = 0; i < ag.buffer().size(); ++i) {
    const Transition& t = ag.buffer().at(i);
    CHECK(t.confidence == 0.25);
    REQUIRE(t.predicted_next_state.size() == e.state_dim());
    // Predicted rate block: log2(1 + g^2) of the fixed gains.
    CHECK(t.predicted_next_state[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.predicted_next_state[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(t.state.size() == e.state_dim());
    CHECK(t.next_state.size() == e.state_dim());
  }

  SUBCASE("without a source the prediction slots stay zero") {
    env::Environment bare(generous_env_config(), generous_trace(60));
    Agent plain(bare.state_dim(), bare.user_slots(), hp, 31);
    const auto bare_log = plain.train(bare, 0, bare.slots(), rp);
    CHECK(bare_log[0].rho_mean == 0.0);
    for (int i = 0; i < plain.buffer().size(); ++i) {
      CHECK(plain.buffer().at(i).confidence == 0.0);
      CHECK(plain.buffer().at(i).predicted_next_state.isZero(0.0));
    }
  }
}

TEST_CASE("checkpoints restore the exact policy and value nets") {
  AgentHyperParams hp = small_hp();
  hp.hidden = 8;
  Agent a(3, 2, hp, 9);

  // Drift the online nets away from the targets so all four differ.
  std::vector<Transition> own;
  own.push_back(make_tr(vec({0.2, 0.4, -0.1}), vec({0.3, 0.7}), 0.5,
                        vec({0.1, 0.1, 0.1}), nn::Vec::Zero(3), 0.0));
  std::vector<const Transition*> batch = {&own[0]};
  a.update_critic(batch, {1.0});
  a.update_actor(batch);
  a.soft_update_targets();

  const std::string path = temp_file("dmca_agent_ckpt.txt");
  a.save(path);

  Agent b(3, 2, hp, 77);  // different random init
  const nn::Vec s = vec({0.4, -0.6, 1.2});
  CHECK(b.act(s) != a.act(s));
  b.load(path);
  CHECK(b.act(s) == a.act(s));
  const nn::Vec act = vec({0.25, 0.75});
  CHECK(b.critic(s, act) == a.critic(s, act));
  CHECK(b.target_critic_value(s, act) == a.target_critic_value(s, act));
  CHECK(b.target_actor_net().forward(s) == a.target_actor_net().forward(s));

  SUBCASE("dimension mismatches are rejected") {
    Agent narrow(2, 2, hp, 9);
    CHECK_THROWS_AS(narrow.load(path), DataError);
    AgentHyperParams thin = hp;
    thin.hidden = 4;
    Agent small(3, 2, thin, 9);
    CHECK_THROWS_AS(small.load(path), DataError);
  }
  SUBCASE("missing checkpoints raise the artifact error") {
    Agent c(3, 2, hp, 9);
    CHECK_THROWS_AS(c.load(temp_file("dmca_agent_nope.txt")), MissingArtifactError);
  }
  std::remove(path.c_str());
}

TEST_CASE("episode logs round-trip through files") {
  std::vector<EpisodeStats> stats;
  EpisodeStats s0;
  s0.episode = 0;
  s0.steps = 17;
  s0.mean_reward = 1.0 / 3.0;
  s0.final_reward = -100.0;
  s0.rho_mean = 0.9500000000000001;
  EpisodeStats s1;
  s1.episode = 1;
  s1.steps = 3000;
  s1.mean_reward = 2.5e-13;
  s1.final_reward = 5.000000000000001;
  s1.rho_mean = 0.0;
  stats = {s0, s1};

  const std::string path = temp_file("dmca_episode_log.csv");
  write_episode_log(path, stats, {"run tag"});
  const auto back = read_episode_log(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].episode == stats[i].episode);
    CHECK(back[i].steps == stats[i].steps);
    CHECK(back[i].mean_reward == stats[i].mean_reward);
    CHECK(back[i].final_reward == stats[i].final_reward);
    CHECK(back[i].rho_mean == stats[i].rho_mean);
  }

  SUBCASE("the comment lands before the header") {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# run tag");
    std::getline(in, line);
    CHECK(line == "episode,steps,mean_reward,final_reward,rho_mean");
  }
  SUBCASE("foreign headers are rejected") {
    const std::string bad = temp_file("dmca_bad_log.csv");
    std::ofstream out(bad);
    out << "a,b\n1,2\n";
    out.close();
    CHECK_THROWS_AS(read_episode_log(bad), DataError);
    std::remove(bad.c_str());
  }
  std::remove(path.c_str());
}

TEST_CASE("training updates change the policy") {
  env::Environment e(generous_env_config(), generous_trace(120));
  reward::RewardParams rp;
  AgentHyperParams hp = small_hp();
  hp.episodes = 2;
  hp.max_steps = 20;
  hp.minibatch = 8;
  hp.critic_batch = 4;
  hp.stop_reward = 1e9;

  Agent ag(e.state_dim(), e.user_slots(), hp, 55);
  std::vector<Eigen::MatrixXd> before;
  for (const nn::Param* p : ag.actor_net().params()) before.push_back(p->value);
  ag.train(e, 0, e.slots(), rp);
  bool moved = false;
  const nn::ParamRefs ps = ag.actor_net().params();
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i]->value != before[i]) moved = true;
  CHECK(moved);

  // Target nets track the online nets but lag behind them.
  const nn::Vec s = e.state(0).values;
  CHECK(ag.target_actor_net().forward(s) != ag.act(s));
}
