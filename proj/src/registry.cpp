#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <thread>

#include "affine/operators.hpp"
#include "affine/scalar_kernels.hpp"
#include "affine/verifier.hpp"

namespace affine {

Profile Profile::named(const std::string& name) {
  Profile p;
  p.name = name;
  if (name == "desk") return p;
  if (name == "quick") {
    p.scale = 0.05;
    p.instances = 5;
    return p;
  }
  if (name == "full") {
    p.scale = 4.0;
    p.instances = 200;
    return p;
  }
  throw std::invalid_argument("unknown profile: " + name + " (expected quick, desk or full)");
}

Profile profile_from_env() {
  const char* env = std::getenv("AFFINE_PROFILE");
  return Profile::named(env && *env ? env : "desk");
}

namespace {

const std::vector<std::string> kIds = {
    "check_c_norm",          "check_ppb_radius",       "check_carlson_levin",      "check_prop_ball_entropy",
    "check_theorem_sphere",  "check_lemma_LZBS",       "check_theorem_main",       "check_moment_entropy_vec",
    "check_affine_moment",   "check_jensen_ball",      "check_reverse_holder",     "check_min_first_random",
    "check_corollary_infty", "check_dual_minkowski",   "check_theorem_D",          "check_santalo",
    "check_elipp_cal",       "check_d_limit",          "check_uniform_entropy",
};

const std::map<std::string, int> kCriterion = {
    {"check_c_norm", 1},          {"check_ppb_radius", 2},        {"check_carlson_levin", 3},
    {"check_prop_ball_entropy", 4}, {"check_theorem_sphere", 5},  {"check_theorem_main", 6},
    {"check_theorem_D", 7},       {"check_elipp_cal", 8},         {"check_d_limit", 9},
    {"check_uniform_entropy", 9}, {"check_dual_minkowski", 10},   {"check_reverse_holder", 10},
    {"check_jensen_ball", 10},    {"check_moment_entropy_vec", 10}, {"check_affine_moment", 10},
    {"check_min_first_random", 10},
};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

using Body = std::function<CheckReport(const CheckOptions&, Rng&)>;

struct Builder {
  const Profile& profile;
  std::string id;
  std::uint64_t base;
  std::vector<CheckJob>& out;
  std::uint64_t counter = 0;

  void add(const std::string& label, CheckMode mode, std::size_t desk_samples, Body body, double tol_eq = -1.0,
           std::optional<Method> method = {}) {
    const std::uint64_t job_seed = derive_seed(base, counter++);
    CheckOptions opts;
    opts.mode = mode;
    opts.label = label;
    opts.method = method;
    opts.budget.seed = derive_seed(job_seed, 1);
    opts.budget.samples = profile.mc_samples
                              ? *profile.mc_samples
                              : std::max<std::size_t>(1000, static_cast<std::size_t>(desk_samples * profile.scale));
    opts.tol_eq = mode == CheckMode::equality && profile.tol_eq ? *profile.tol_eq : tol_eq;
    const std::string prof = profile.name;
    CheckJob job;
    job.check_id = id;
    job.label = label;
    auto it = kCriterion.find(id);
    job.criterion = it == kCriterion.end() ? 0 : it->second;
    job.run = [opts, body, job_seed, prof]() {
      Rng rng = make_stream(job_seed, 0);
      CheckReport r = body(opts, rng);
      r.label = opts.label;
      r.params["profile"] = prof;
      r.params["job_seed"] = job_seed;
      return r;
    };
    out.push_back(std::move(job));
  }

  int instances() const { return profile.instances; }
};

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

Vec random_direction(int d, Rng& rng) {
  Vec u(static_cast<std::size_t>(d));
  uniform_direction(rng, u);
  return u;
}

// lambda uniformly placed in (threshold, hi).
double random_lambda(int d, double p, Rng& rng) {
  const double lo = lambda_threshold(d, p);
  const double u = uniform(rng, 0.0, 1.0);
  if (u < 0.3) return lo + (1.0 - lo) * uniform(rng, 0.1, 0.95);
  if (u < 0.6) return 1.0;
  return uniform(rng, 1.1, 3.0);
}

StarFunction body_star(const BodySpec& k) {
  auto b = std::make_shared<const BodySpec>(k);
  return StarFunction{k.dim(), [b](std::span<const double> u) { return b->radial(u); }, kInf, k.origin_interior() ? k.polar().support_kinks() : std::vector<Vec>{}};
}

StarFunction scaled_star(const StarFunction& s, double t) {
  return StarFunction{s.dim, [s, t](std::span<const double> u) { return t * s(u); }, s.order, s.kinks};
}

// Radial function of D L for diagonal D.
StarFunction stretched_star(const StarFunction& s, const Vec& diag) {
  return StarFunction{s.dim,
                      [s, diag](std::span<const double> u) {
                        double buf[kMaxDim];
                        for (std::size_t i = 0; i < diag.size(); ++i) buf[i] = u[i] / diag[i];
                        std::span<const double> w(buf, diag.size());
                        const double len = norm2(w);
                        for (std::size_t i = 0; i < diag.size(); ++i) buf[i] /= len;
                        return s(w) / len;
                      },
                      s.order,
                      {}};
}

const Matrix kDegrade{{1.5, 0.0}, {0.0, 1.0}};

void carlson_levin_jobs(Builder& b) {
  struct Eq {
    int n;
    double p, lambda, a, bb;
  };
  for (const Eq e : {Eq{2, 2, 1, 1, 1}, Eq{1, 2, 2, 1, 2}, Eq{2, 2, 0.8, 1.5, 0.7}, Eq{3, 1, 0.9, 1, 1},
                     Eq{3, 3.5, 1.5, 2, 0.5}}) {
    const std::string tag = "n=" + std::to_string(e.n) + " p=" + std::to_string(e.p) + " lambda=" + std::to_string(e.lambda);
    b.add("extremizer " + tag, CheckMode::equality, 0, [e](const CheckOptions& o, Rng&) {
      return check_carlson_levin(e.n, e.p, e.lambda, carlson_levin_extremizer(e.p, e.lambda, e.a, e.bb),
                                 branch_for(e.lambda), o);
    }, 1e-7);
    b.add("guard: exponent 1.5p " + tag, CheckMode::sensitivity, 0, [e](const CheckOptions& o, Rng&) {
      return check_carlson_levin(e.n, e.p, e.lambda, carlson_levin_extremizer(1.5 * e.p, e.lambda, e.a, e.bb),
                                 branch_for(e.lambda), o);
    });
  }
  b.add("two-Gaussian mixture n=2 p=2 lambda=0.8", CheckMode::inequality, 0, [](const CheckOptions& o, Rng&) {
    RadialProfile f{[](double r) { return 0.6 * std::exp(-r * r / 2) + 0.4 * std::exp(-r * r / 18); }, kInf,
                    "0.6 exp(-r^2/2) + 0.4 exp(-r^2/18)"};
    return check_carlson_levin(2, 2.0, 0.8, f, CarlsonLevinBranch::below_one, o);
  });
  for (const auto branch : {CarlsonLevinBranch::below_one, CarlsonLevinBranch::above_one, CarlsonLevinBranch::log})
    for (int i = 0; i < b.instances(); ++i)
      b.add("random density #" + std::to_string(i), CheckMode::inequality, 0, [branch](const CheckOptions& o, Rng& rng) {
        const int n = 1 + static_cast<int>(uniform(rng, 0.0, 3.0));
        const double p = uniform(rng, 1.0, 3.0);
        const double lo = lambda_threshold(n, p);
        const double lambda = branch == CarlsonLevinBranch::below_one
                                  ? lo + (1.0 - lo) * uniform(rng, 0.05, 0.95)
                                  : (branch == CarlsonLevinBranch::above_one ? uniform(rng, 1.1, 3.0) : 1.0);
        return check_carlson_levin(n, p, lambda, random_radial_density(n, p, lambda, rng), branch, o);
      });
}

void prop_ball_jobs(Builder& b) {
  for (double p : {1.0, 2.0})
    for (double lambda : {0.9, 1.0, 2.0})
      b.add("standard p=" + std::to_string(p) + " lambda=" + std::to_string(lambda), CheckMode::equality, 0,
            [p, lambda](const CheckOptions& o, Rng&) {
              return check_prop_ball_entropy(p, lambda, GaussianSpec::standard(2, p, lambda), o);
            });
  b.add("A^{-t} Z, A=diag(2,1), MC directions", CheckMode::equality, 20000, [](const CheckOptions& o, Rng&) {
    const Matrix a{{2.0, 0.0}, {0.0, 1.0}};
    return check_prop_ball_entropy(2.0, 1.0, GaussianSpec::standard(2, 2.0, 1.0).linear_image(a.inverse().transpose()), o);
  }, 0.02, Method::mc);
  b.add("random ellipsoidal contour", CheckMode::equality, 0, [](const CheckOptions& o, Rng& rng) {
    return check_prop_ball_entropy(2.0, 1.5, GaussianSpec::standard(2, 2.0, 1.5).linear_image(random_matrix(2, rng)), o);
  });
  b.add("uniform on the square", CheckMode::inequality, 0, [](const CheckOptions& o, Rng&) {
    return check_prop_ball_entropy(2.0, 1.0, GaussianSpec::uniform(ContourGauge::of_body(BodySpec::cube(2)), {2, 1}), o);
  });
  for (int i = 0; i < std::max(5, b.instances() / 5); ++i)
    b.add("random law #" + std::to_string(i), CheckMode::inequality, 0, [](const CheckOptions& o, Rng& rng) {
      const double p = uniform(rng, 1.0, 3.0);
      const double lambda = random_lambda(2, p, rng);
      return check_prop_ball_entropy(p, lambda, random_vector_spec(2, p, lambda, rng), o);
    });
  b.add("guard: profile lambda=2 checked at lambda=1", CheckMode::sensitivity, 0, [](const CheckOptions& o, Rng&) {
    return check_prop_ball_entropy(2.0, 1.0, GaussianSpec::standard(2, 2.0, 2.0), o);
  });
}

void theorem_sphere_jobs(Builder& b) {
  const BodySpec interval = BodySpec::interval(1.0, 1.0);
  const BodySpec square = BodySpec::cube(2);
  const Matrix id = Matrix::identity(2);
  b.add("extremizers m=1 interval A=I", CheckMode::equality, 0, [=](const CheckOptions& o, Rng&) {
    const auto e = theorem_sphere_extremizers(2, interval, 2.0, id, id);
    return check_theorem_sphere(2, 1, 2.0, interval, e.f, e.g, o);
  });
  b.add("extremizers m=1 interval random A", CheckMode::equality, 0, [=](const CheckOptions& o, Rng& rng) {
    const Matrix a = random_matrix(2, rng);
    const auto e = theorem_sphere_extremizers(2, interval, 2.0, a, a);
    return check_theorem_sphere(2, 1, 2.0, interval, e.f, e.g, o);
  });
  b.add("extremizers m=1 interval A=I, MC", CheckMode::equality, 200000, [=](const CheckOptions& o, Rng&) {
    const auto e = theorem_sphere_extremizers(2, interval, 2.0, id, id);
    return check_theorem_sphere(2, 1, 2.0, interval, e.f, e.g, o);
  }, kTolEqMC, Method::mc);
  b.add("extremizers m=2 square A=I", CheckMode::equality, 1000000, [=](const CheckOptions& o, Rng&) {
    const auto e = theorem_sphere_extremizers(2, square, 2.0, id, id);
    return check_theorem_sphere(2, 2, 2.0, square, e.f, e.g, o);
  }, kTolEqMC);
  b.add("extremizers m=2 square random A", CheckMode::equality, 200000, [=](const CheckOptions& o, Rng& rng) {
    const Matrix a = random_matrix(2, rng);
    const auto e = theorem_sphere_extremizers(2, square, 2.0, a, a);
    return check_theorem_sphere(2, 2, 2.0, square, e.f, e.g, o);
  }, kTolEqMC);
  b.add("f = g = 1, m=1", CheckMode::inequality, 0, [=](const CheckOptions& o, Rng&) {
    const SphereFn one = [](std::span<const double>) { return 1.0; };
    return check_theorem_sphere(2, 1, 2.0, interval, one, one, o);
  });
  for (int i = 0; i < std::max(5, b.instances() / 2); ++i) {
    b.add("random pair m=1 #" + std::to_string(i), CheckMode::inequality, 0, [=](const CheckOptions& o, Rng& rng) {
      const auto f = random_sphere_function(2, rng);
      const auto g = random_sphere_function(2, rng);
      return check_theorem_sphere(2, 1, 2.0, interval, f, g, o);
    });
    b.add("random pair m=2 #" + std::to_string(i), CheckMode::inequality, 20000, [=](const CheckOptions& o, Rng& rng) {
      const auto f = random_sphere_function(4, rng);
      const auto g = random_sphere_function(2, rng);
      return check_theorem_sphere(2, 2, 2.0, square, f, g, o);
    });
  }
  for (int i = 0; i < std::max(2, b.instances() / 10); ++i)
    b.add("random pair, asymmetric Q #" + std::to_string(i), CheckMode::inequality, 0, [](const CheckOptions& o, Rng& rng) {
      const auto f = random_sphere_function(2, rng);
      const auto g = random_sphere_function(2, rng);
      return check_theorem_sphere(2, 1, 2.0, BodySpec::interval(0.4, 1.0), f, g, o);
    });
  b.add("guard: m=1 f uses A diag(1.5,1)", CheckMode::sensitivity, 0, [=](const CheckOptions& o, Rng&) {
    const auto e = theorem_sphere_extremizers(2, interval, 2.0, kDegrade, id);
    return check_theorem_sphere(2, 1, 2.0, interval, e.f, e.g, o);
  });
  b.add("guard: m=2 f uses A diag(1.5,1)", CheckMode::sensitivity, 200000, [=](const CheckOptions& o, Rng&) {
    const auto e = theorem_sphere_extremizers(2, square, 2.0, kDegrade, id);
    return check_theorem_sphere(2, 2, 2.0, square, e.f, e.g, o);
  });
}

void lzbs_jobs(Builder& b) {
  const BodySpec interval = BodySpec::interval(1.0, 1.0);
  const BodySpec square = BodySpec::cube(2);
  const Matrix id = Matrix::identity(2);
  b.add("L = polar projection ball, K = ball", CheckMode::equality, 0, [=](const CheckOptions& o, Rng&) {
    const auto e = lzbs_extremizers(2, interval, 2.0, id, id);
    return check_lemma_LZBS(2, 1, 2.0, interval, e.k, e.l, o);
  });
  b.add("L = polar projection body of A B, K = (A B)°", CheckMode::equality, 0, [=](const CheckOptions& o, Rng& rng) {
    const Matrix a = random_matrix(2, rng);
    const auto e = lzbs_extremizers(2, interval, 3.0, a, a);
    return check_lemma_LZBS(2, 1, 3.0, interval, e.k, e.l, o);
  });
  b.add("K = L = ball", CheckMode::inequality, 0, [=](const CheckOptions& o, Rng&) {
    const auto ball = body_star(BodySpec::ball(2));
    return check_lemma_LZBS(2, 1, 2.0, interval, ball, ball, o);
  });
  for (int i = 0; i < std::max(5, b.instances() / 5); ++i)
    b.add("random stars m=1 #" + std::to_string(i), CheckMode::inequality, 0, [=](const CheckOptions& o, Rng& rng) {
      const double phase = uniform(rng, 0.0, 2 * kPi);
      const StarFunction k{2, [phase](std::span<const double> v) { return 1.0 + 0.3 * std::sin(3 * std::atan2(v[1], v[0]) + phase); }, kInf, {}};
      return check_lemma_LZBS(2, 1, 2.0, interval, k, random_star(2, rng), o);
    });
  for (int i = 0; i < std::max(2, b.instances() / 20); ++i)
    b.add("random stars m=2 #" + std::to_string(i), CheckMode::inequality, 20000, [=](const CheckOptions& o, Rng& rng) {
      const auto k = random_star(2, rng);
      return check_lemma_LZBS(2, 2, 2.0, square, k, random_star(4, rng), o);
    });
  b.add("guard: K = (diag(1.5,1) B)°", CheckMode::sensitivity, 0, [=](const CheckOptions& o, Rng&) {
    const auto e = lzbs_extremizers(2, interval, 2.0, kDegrade, id);
    return check_lemma_LZBS(2, 1, 2.0, interval, e.k, e.l, o);
  });
}

void theorem_main_jobs(Builder& b) {
  const BodySpec interval = BodySpec::interval(1.0, 1.0);
  const BodySpec square = BodySpec::cube(2);
  auto equality = [](int m, const BodySpec& q, const Matrix& a, double alpha, const CheckOptions& o) {
    const auto x = GaussianSpec::matrix(2, q, 2.0, 1.0).linear_image(a);
    const auto y = GaussianSpec::standard(2, 2.0, 1.0).linear_image(a.inverse().transpose() * alpha);
    return check_theorem_main(2, m, 2.0, 1.0, q, x, y, o);
  };
  b.add("equality m=1 interval A=I alpha=1", CheckMode::equality, 1000000, [=](const CheckOptions& o, Rng&) {
    return equality(1, interval, Matrix::identity(2), 1.0, o);
  }, kTolEqMC);
  b.add("equality m=2 square A=I alpha=1", CheckMode::equality, 1000000, [=](const CheckOptions& o, Rng&) {
    return equality(2, square, Matrix::identity(2), 1.0, o);
  }, kTolEqMC);
  b.add("equality m=1 interval random A alpha=0.7", CheckMode::equality, 200000, [=](const CheckOptions& o, Rng& rng) {
    return equality(1, interval, random_matrix(2, rng), 0.7, o);
  }, kTolEqMC);
  for (int n : {2, 3})
    for (double p : {1.0, 2.0, 3.0})
      for (double lambda : {0.9, 1.0, 2.0}) {
        if (!(lambda > lambda_threshold(n, p))) continue;
        b.add("m=1 constant n=" + std::to_string(n) + " p=" + std::to_string(p) + " lambda=" + std::to_string(lambda),
              CheckMode::equality, 0,
              [=](const CheckOptions& o, Rng&) { return check_theorem_main_constant(n, p, lambda, o); }, 1e-8);
      }
  for (int i = 0; i < std::max(4, b.instances() / 10); ++i)
    b.add("random specs #" + std::to_string(i), CheckMode::inequality, 100000, [=](const CheckOptions& o, Rng& rng) {
      const int m = i % 2 == 0 ? 1 : 2;
      const BodySpec& q = m == 1 ? interval : square;
      const auto x = GaussianSpec::matrix(2, q, 2.0, 1.0).linear_image(random_matrix(2, rng));
      const auto y = random_vector_spec(2, 2.0, 1.0, rng);
      return check_theorem_main(2, m, 2.0, 1.0, q, x, y, o);
    });
  b.add("nonstandard m=2 square A=diag(2,1)", CheckMode::inequality, 100000, [=](const CheckOptions& o, Rng&) {
    const Matrix a{{2.0, 0.0}, {0.0, 1.0}};
    const auto x = GaussianSpec::matrix(2, square, 2.0, 1.0).linear_image(a);
    const auto y = GaussianSpec::standard(2, 2.0, 1.0).linear_image(a);
    return check_theorem_main(2, 2, 2.0, 1.0, square, x, y, o);
  });
  b.add("guard: X uses A diag(1.5,1)", CheckMode::sensitivity, 200000, [=](const CheckOptions& o, Rng&) {
    const auto x = GaussianSpec::matrix(2, interval, 2.0, 1.0).linear_image(kDegrade);
    const auto y = GaussianSpec::standard(2, 2.0, 1.0);
    return check_theorem_main(2, 1, 2.0, 1.0, interval, x, y, o);
  });
}

void moment_entropy_jobs(Builder& b) {
  b.add("Y = 3Z n=2 p=2 lambda=1", CheckMode::equality, 0, [](const CheckOptions& o, Rng&) {
    return check_moment_entropy_vec(2.0, 1.0, GaussianSpec::standard(2, 2.0, 1.0).linear_image(Matrix::identity(2) * 3.0), o);
  }, 1e-8);
  b.add("Y = 3Z n=3 p=1.5 lambda=2", CheckMode::equality, 0, [](const CheckOptions& o, Rng&) {
    return check_moment_entropy_vec(1.5, 2.0, GaussianSpec::standard(3, 1.5, 2.0).linear_image(Matrix::identity(3) * 3.0), o);
  }, 1e-8);
  b.add("Y = diag(2,1) Z", CheckMode::inequality, 0, [](const CheckOptions& o, Rng&) {
    return check_moment_entropy_vec(2.0, 1.0, GaussianSpec::standard(2, 2.0, 1.0).linear_image(Matrix{{2.0, 0.0}, {0.0, 1.0}}), o);
  });
  b.add("Y uniform on the ball", CheckMode::inequality, 0, [](const CheckOptions& o, Rng&) {
    return check_moment_entropy_vec(2.0, 1.0, GaussianSpec::uniform(ContourGauge::euclidean_norm(2), {2, 1}), o);
  });
  for (int i = 0; i < b.instances(); ++i)
    b.add("random law #" + std::to_string(i), CheckMode::inequality, 0, [](const CheckOptions& o, Rng& rng) {
      const int n = uniform(rng, 0.0, 1.0) < 0.8 ? 2 : 3;
      const double p = uniform(rng, 1.0, 3.0);
      const double lambda = random_lambda(n, p, rng);
      return check_moment_entropy_vec(p, lambda, random_vector_spec(n, p, lambda, rng), o);
    });
  b.add("guard: Y = diag(1.5,1) 3Z", CheckMode::sensitivity, 0, [](const CheckOptions& o, Rng&) {
    return check_moment_entropy_vec(2.0, 1.0, GaussianSpec::standard(2, 2.0, 1.0).linear_image(kDegrade * 3.0), o);
  });
}

void affine_moment_jobs(Builder& b) {
  const BodySpec interval = BodySpec::interval(1.0, 1.0);
  b.add("Y standard n=2 m=1 p=2 lambda=1", CheckMode::equality, 20000, [=](const CheckOptions& o, Rng&) {
    return check_affine_moment(1, 2.0, 1.0, interval, GaussianSpec::standard(2, 2.0, 1.0), o);
  }, kTolEqNestedMC);
  b.add("Y uniform on the square", CheckMode::inequality, 20000, [=](const CheckOptions& o, Rng&) {
    return check_affine_moment(1, 2.0, 1.0, interval, GaussianSpec::uniform(ContourGauge::of_body(BodySpec::cube(2)), {2, 1}), o);
  });
  for (int i = 0; i < b.instances(); ++i)
    b.add("random law #" + std::to_string(i), CheckMode::inequality, 4000, [i](const CheckOptions& o, Rng& rng) {
      const int m = i % 4 == 3 ? 2 : 1;
      const double c = uniform(rng, 0.5, 2.0);
      const BodySpec q = m == 1 ? BodySpec::interval(c, c) : BodySpec::cube(2);
      const double p = m == 1 ? uniform(rng, 1.0, 3.0) : 2.0;
      const double lambda = random_lambda(2 * m, p, rng);
      return check_affine_moment(m, p, lambda, q, random_vector_spec(2, p, lambda, rng), o);
    });
  b.add("guard: Y uniform on the ball", CheckMode::sensitivity, 20000, [=](const CheckOptions& o, Rng&) {
    return check_affine_moment(1, 2.0, 1.0, interval, GaussianSpec::uniform(ContourGauge::euclidean_norm(2), {2, 1}), o);
  });
}

void jensen_jobs(Builder& b) {
  b.add("standard normal n=2", CheckMode::equality, 0, [](const CheckOptions& o, Rng&) {
    return check_jensen_ball(2.0, GaussianSpec::standard(2, 2.0, 1.0), o);
  }, 1e-7);
  b.add("uniform on the ball", CheckMode::equality, 0, [](const CheckOptions& o, Rng&) {
    return check_jensen_ball(2.0, GaussianSpec::uniform(ContourGauge::euclidean_norm(2), {2, 1}), o);
  }, 1e-8);
  b.add("A^{-t} Z, A=diag(3,1)", CheckMode::inequality, 0, [](const CheckOptions& o, Rng&) {
    const Matrix a{{3.0, 0.0}, {0.0, 1.0}};
    return check_jensen_ball(2.0, GaussianSpec::standard(2, 2.0, 1.0).linear_image(a.inverse().transpose()), o);
  });
  for (int i = 0; i < b.instances(); ++i)
    b.add("random law #" + std::to_string(i), CheckMode::inequality, 0, [](const CheckOptions& o, Rng& rng) {
      const double p = uniform(rng, 1.0, 3.0);
      return check_jensen_ball(p, random_vector_spec(2, p, kLambdaInfinity, rng), o);
    });
  b.add("guard: diag(1.5,1) Z", CheckMode::sensitivity, 0, [](const CheckOptions& o, Rng&) {
    return check_jensen_ball(2.0, GaussianSpec::standard(2, 2.0, 1.0).linear_image(kDegrade), o);
  });
}

void reverse_holder_jobs(Builder& b) {
  const Grid unit = Grid::gauss_legendre(0.0, 1.0);
  b.add("g = f^{q-1}, q=1/2, f=1+x^2", CheckMode::equality, 0, [=](const CheckOptions& o, Rng&) {
    return check_reverse_holder(
        0.5, [](double x) { return 1 + x * x; }, [](double x) { return std::pow(1 + x * x, -0.5); }, unit, o);
  }, 1e-10);
  b.add("f = g = 1", CheckMode::equality, 0, [=](const CheckOptions& o, Rng&) {
    const Fn1 one = [](double) { return 1.0; };
    return check_reverse_holder(0.3, one, one, unit, o);
  }, 1e-12);
  for (int i = 0; i < b.instances(); ++i)
    b.add("random polynomials #" + std::to_string(i), CheckMode::inequality, 0, [](const CheckOptions& o, Rng& rng) {
      auto poly = [&rng]() {
        Vec c(5);
        for (auto& x : c) x = uniform(rng, 0.0, 1.0);
        c[0] += 0.05;
        return [c](double x) { return c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * c[4]))); };
      };
      const double q = uniform(rng, 0.05, 0.95);
      const double a = uniform(rng, 0.0, 1.0);
      const Fn1 f = poly();
      const Fn1 g = poly();
      return check_reverse_holder(q, f, g, Grid::gauss_legendre(a, a + uniform(rng, 0.5, 3.0)), o);
    });
  b.add("guard: g = f^{q-1} (1+x)", CheckMode::sensitivity, 0, [=](const CheckOptions& o, Rng&) {
    return check_reverse_holder(
        0.5, [](double x) { return 1 + x * x; }, [](double x) { return (1 + x) * std::pow(1 + x * x, -0.5); }, unit, o);
  });
}

void min_first_jobs(Builder& b) {
  const BodySpec interval = BodySpec::interval(1.0, 1.0);
  const std::size_t ny = 2000;
  auto data_law = [=](const SampleCloud& y, const CheckOptions& o) {
    Budget vb = o.budget;
    vb.seed = derive_seed(o.budget.seed, 9);
    return GaussianSpec(data_contour(y, interval, 2.0, 1, default_method(2), vb), {2, 1}, 2.0, 1.0);
  };
  b.add("X contoured by the data gauge, Y standard normal", CheckMode::equality, 20000, [=](const CheckOptions& o, Rng& rng) {
    const auto y = sample(GaussianSpec::standard(2, 2.0, 1.0), ny, rng());
    return check_min_first_random(1, 2.0, 1.0, interval, data_law(y, o), y, o);
  }, kTolEqNestedMC);
  b.add("X standard matrix Gaussian, Y = diag(2,1) Z", CheckMode::inequality, 20000, [=](const CheckOptions& o, Rng& rng) {
    const auto y = sample(GaussianSpec::standard(2, 2.0, 1.0).linear_image(Matrix{{2.0, 0.0}, {0.0, 1.0}}), ny, rng());
    return check_min_first_random(1, 2.0, 1.0, interval, GaussianSpec::matrix(2, interval, 2.0, 1.0), y, o);
  });
  b.add("Y a point mass, n=1", CheckMode::inequality, 20000, [=](const CheckOptions& o, Rng& rng) {
    SampleCloud y;
    y.shape = {1, 1};
    y.data.assign(64, 1.0);
    y.seed = rng();
    y.provenance = "point mass at 1";
    return check_min_first_random(1, 2.0, 1.0, interval, GaussianSpec::standard(1, 2.0, 1.0), y, o);
  });
  for (int i = 0; i < b.instances(); ++i)
    b.add("random laws #" + std::to_string(i), CheckMode::inequality, 4000, [=](const CheckOptions& o, Rng& rng) {
      const double p = uniform(rng, 1.0, 3.0);
      const double lambda = random_lambda(2, p, rng);
      const auto y = sample(random_vector_spec(2, p, kLambdaInfinity, rng), 500, rng());
      return check_min_first_random(1, p, lambda, interval, random_vector_spec(2, p, lambda, rng), y, o);
    });
  b.add("guard: data-gauge X times diag(1.5,1)", CheckMode::sensitivity, 20000, [=](const CheckOptions& o, Rng& rng) {
    const auto y = sample(GaussianSpec::standard(2, 2.0, 1.0), ny, rng());
    return check_min_first_random(1, 2.0, 1.0, interval, data_law(y, o).linear_image(kDegrade), y, o);
  });
}

void corollary_jobs(Builder& b) {
  const BodySpec interval = BodySpec::interval(1.0, 1.0);
  const auto ball = body_star(BodySpec::ball(2));
  b.add("L = 1.3 ball (the p = inf polar projection ball), K = ball", CheckMode::equality, 20000,
        [=](const CheckOptions& o, Rng&) { return check_corollary_infty(2, 1, interval, scaled_star(ball, 1.3), ball, o); });
  b.add("tiny L and K", CheckMode::inequality, 20000, [=](const CheckOptions& o, Rng&) {
    return check_corollary_infty(2, 1, interval, scaled_star(ball, 1e-3), scaled_star(ball, 1e-3), o);
  });
  b.add("m=2 square, L = the p = inf polar projection ball", CheckMode::inequality, 20000, [](const CheckOptions& o, Rng&) {
    const BodySpec sq = BodySpec::cube(2);
    const StarFunction l{4, [sq](std::span<const double> u) { return 1.0 / ppb_infinity_gauge(sq, {2, 2}, u); }, kInf, {}};
    return check_corollary_infty(2, 2, sq, l, body_star(BodySpec::ball(2)), o);
  });
  for (int i = 0; i < std::max(3, b.instances() / 10); ++i)
    b.add("random boxes #" + std::to_string(i), CheckMode::inequality, 20000, [=](const CheckOptions& o, Rng& rng) {
      const Vec dl{uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0)};
      const Vec dk{uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0)};
      const auto l = body_star(BodySpec::linear_image(Matrix::diagonal(dl), BodySpec::cube(2)));
      const auto k = body_star(BodySpec::linear_image(Matrix::diagonal(dk), BodySpec::cube(2)));
      return check_corollary_infty(2, 1, interval, l, k, o);
    });
  b.add("guard: K = diag(1.5,1) B", CheckMode::sensitivity, 20000, [=](const CheckOptions& o, Rng&) {
    return check_corollary_infty(2, 1, interval, ball, body_star(BodySpec::ellipsoid(kDegrade)), o);
  });
}

void dual_minkowski_jobs(Builder& b) {
  b.add("K = 1.7 L", CheckMode::equality, 0, [](const CheckOptions& o, Rng& rng) {
    const auto l = random_star(2, rng);
    return check_dual_minkowski(scaled_star(l, 1.7), l, 2.0, o);
  });
  for (int i = 0; i < b.instances(); ++i)
    b.add("random stars #" + std::to_string(i), CheckMode::inequality, 0, [i](const CheckOptions& o, Rng& rng) {
      const int d = i % 5 == 4 ? 3 : 2;
      const auto k = random_star(d, rng);
      const auto l = random_star(d, rng);
      return check_dual_minkowski(k, l, uniform(rng, 1.0, 3.0), o);
    });
  b.add("guard: K = diag(1.5,1) L", CheckMode::sensitivity, 0, [](const CheckOptions& o, Rng& rng) {
    const auto l = random_star(2, rng);
    return check_dual_minkowski(stretched_star(l, {1.5, 1.0}), l, 2.0, o);
  });
}

void theorem_D_jobs(Builder& b) {
  for (int i = 0; i < 20; ++i) {
    const int m = i < 10 ? 1 : 2;
    const bool square = i % 2 == 0;
    const double p = m == 1 ? 1.0 + i % 3 : 2.0;
    const std::string label = std::string(square ? "square" : "random ellipsoid") + " m=" + std::to_string(m) +
                              " p=" + std::to_string(p) + " #" + std::to_string(i);
    b.add(label, square ? CheckMode::inequality : CheckMode::equality, 100000, [=](const CheckOptions& o, Rng& rng) {
      const BodySpec q = m == 1 ? BodySpec::interval(1.0, 1.0) : BodySpec::cube(2);
      const BodySpec k = square ? BodySpec::cube(2, uniform(rng, 0.5, 2.0)) : BodySpec::ellipsoid(random_matrix(2, rng));
      return check_theorem_D(2, p, q, k, o);
    }, m == 1 ? -1.0 : 0.0);
  }
  b.add("guard: square m=1 p=2", CheckMode::sensitivity, 0, [](const CheckOptions& o, Rng&) {
    return check_theorem_D(2, 2.0, BodySpec::interval(1.0, 1.0), BodySpec::cube(2), o);
  });
}

void santalo_jobs(Builder& b) {
  const BodySpec interval = BodySpec::interval(1.0, 1.0);
  b.add("L = polar projection ball", CheckMode::equality, 0, [=](const CheckOptions& o, Rng&) {
    return check_santalo(2, 2.0, interval, PolarProjectionBody(BodySpec::ball(2), interval, 2.0).star(), o);
  });
  b.add("L = polar projection body of A B", CheckMode::equality, 0, [=](const CheckOptions& o, Rng& rng) {
    return check_santalo(2, 2.0, interval, PolarProjectionBody(BodySpec::ellipsoid(random_matrix(2, rng)), interval, 2.0).star(), o);
  }, 0.02);
  for (int i = 0; i < std::max(3, b.instances() / 10); ++i)
    b.add("random star #" + std::to_string(i), CheckMode::inequality, 0,
          [=](const CheckOptions& o, Rng& rng) { return check_santalo(2, 2.0, interval, random_star(2, rng), o); });
  b.add("guard: L = square", CheckMode::sensitivity, 0, [=](const CheckOptions& o, Rng&) {
    return check_santalo(2, 2.0, interval, body_star(BodySpec::cube(2)), o);
  });
}

void elipp_jobs(Builder& b) {
  for (int i = 0; i < 2; ++i)
    b.add("n=2 m=2 square p=2 #" + std::to_string(i), CheckMode::equality, 100000, [](const CheckOptions& o, Rng& rng) {
      Vec v = random_direction(2, rng);
      for (auto& x : v) x *= uniform(rng, 0.5, 2.0);
      return check_elipp_cal(2, 2.0, BodySpec::cube(2), v, o);
    }, 0.01);
  b.add("n=2 m=1 interval p=3", CheckMode::equality, 0, [](const CheckOptions& o, Rng& rng) {
    return check_elipp_cal(2, 3.0, BodySpec::interval(1.0, 1.0), random_direction(2, rng), o);
  });
}

void constants_jobs(Builder& b, const std::string& id) {
  if (id == "check_c_norm") {
    for (int n : {1, 2, 3})
      for (double p : {1.0, 2.0, 3.5})
        for (double lambda : {0.9, 1.0, 2.0}) {
          if (!(lambda > lambda_threshold(n, p))) continue;
          b.add("n=" + std::to_string(n) + " p=" + std::to_string(p) + " lambda=" + std::to_string(lambda),
                CheckMode::equality, 0, [=](const CheckOptions& o, Rng&) { return check_c_norm(n, p, lambda, o); }, 1e-8);
        }
  } else if (id == "check_ppb_radius") {
    for (int n : {2, 3})
      for (double p : {1.0, 2.0, 4.0})
        b.add("n=" + std::to_string(n) + " p=" + std::to_string(p), CheckMode::equality, 0, [=](const CheckOptions& o, Rng& rng) {
          Vec t = random_direction(n, rng);
          const double s = uniform(rng, 0.5, 2.0);
          for (auto& x : t) x *= s;
          return check_ppb_radius(n, p, t, o);
        }, 1e-6);
  } else if (id == "check_d_limit") {
    for (int n : {1, 2, 3, 5, 10})
      b.add("n=" + std::to_string(n) + " p=1000", CheckMode::equality, 0,
            [=](const CheckOptions& o, Rng&) { return check_d_limit(n, 1000.0, o); }, 0.01);
  } else if (id == "check_uniform_entropy") {
    b.add("euclidean ball n=2", CheckMode::equality, 10000, [](const CheckOptions& o, Rng&) {
      return check_uniform_entropy(ContourGauge::euclidean_norm(2), o.budget.samples, o);
    }, 1e-6);
    b.add("cube n=3", CheckMode::equality, 10000, [](const CheckOptions& o, Rng&) {
      return check_uniform_entropy(ContourGauge::of_body(BodySpec::cube(3)), o.budget.samples, o);
    }, 1e-6);
    b.add("polar projection ball n=2 m=1", CheckMode::equality, 10000, [](const CheckOptions& o, Rng&) {
      return check_uniform_entropy(ContourGauge::polar_projection(2, BodySpec::interval(1.0, 1.0), 2.0), o.budget.samples, o);
    }, 1e-6);
  }
}

void jobs_for(const std::string& id, const Profile& profile, std::uint64_t seed, std::vector<CheckJob>& out) {
  Builder b{profile, id, derive_seed(seed, fnv1a(id)), out};
  if (id == "check_carlson_levin") carlson_levin_jobs(b);
  else if (id == "check_prop_ball_entropy") prop_ball_jobs(b);
  else if (id == "check_theorem_sphere") theorem_sphere_jobs(b);
  else if (id == "check_lemma_LZBS") lzbs_jobs(b);
  else if (id == "check_theorem_main") theorem_main_jobs(b);
  else if (id == "check_moment_entropy_vec") moment_entropy_jobs(b);
  else if (id == "check_affine_moment") affine_moment_jobs(b);
  else if (id == "check_jensen_ball") jensen_jobs(b);
  else if (id == "check_reverse_holder") reverse_holder_jobs(b);
  else if (id == "check_min_first_random") min_first_jobs(b);
  else if (id == "check_corollary_infty") corollary_jobs(b);
  else if (id == "check_dual_minkowski") dual_minkowski_jobs(b);
  else if (id == "check_theorem_D") theorem_D_jobs(b);
  else if (id == "check_santalo") santalo_jobs(b);
  else if (id == "check_elipp_cal") elipp_jobs(b);
  else constants_jobs(b, id);
}

}  // namespace

std::vector<std::string> check_ids() { return kIds; }

std::string canonical_check_id(const std::string& id) {
  const std::string full = id.rfind("check_", 0) == 0 ? id : "check_" + id;
  if (std::find(kIds.begin(), kIds.end(), full) == kIds.end()) throw std::invalid_argument("unknown check_id: " + id);
  return full;
}

std::vector<CheckJob> make_jobs(const std::string& id, const Profile& profile, std::uint64_t seed) {
  std::vector<CheckJob> out;
  if (id == "all") {
    for (const auto& x : kIds) jobs_for(x, profile, seed, out);
  } else {
    jobs_for(canonical_check_id(id), profile, seed, out);
  }
  return out;
}

std::vector<CheckReport> run_jobs(const std::vector<CheckJob>& jobs, int workers) {
  std::vector<CheckReport> reports(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        reports[i] = jobs[i].run();
      } catch (const std::exception& e) {
        CheckReport r;
        r.check_id = jobs[i].check_id;
        r.label = jobs[i].label;
        r.pass = false;
        r.lhs.valid = r.rhs.valid = false;
        r.note = std::string("error: ") + e.what();
        reports[i] = r;
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < w; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return jobs[a].check_id < jobs[b].check_id; });
  std::vector<CheckReport> sorted;
  sorted.reserve(order.size());
  for (std::size_t i : order) sorted.push_back(std::move(reports[i]));
  return sorted;
}

}  // namespace affine
