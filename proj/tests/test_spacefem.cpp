#include <doctest.h>

#include <cmath>

#include "multirate/fespace.hpp"
#include "multirate/mesh.hpp"
#include "multirate/projections.hpp"

using namespace multirate;

TEST_CASE("1D coupled mesh") {
  auto cm = build_coupled_mesh_1d(0.5, 0.25);
  CHECK(cm.sub(1).num_cells() == 2);
  CHECK(cm.sub(2).num_cells() == 2);
  REQUIRE(cm.interface().size() == 1);
  CHECK(cm.interface()[0].p0[0] == doctest::Approx(0.5));
  // Paired normals are opposite by construction: n2 = -n1.
  CHECK(cm.interface()[0].normal1[0] == 1.0);

  CHECK_THROWS_AS(build_coupled_mesh_1d(0.0, 0.25), MeshSizeError);
  CHECK_THROWS_AS(build_coupled_mesh_1d(0.5, 0.3), MeshSizeError);
}

TEST_CASE("two-pipe mesh geometry") {
  auto cm = build_two_pipe_mesh(2);
  CHECK(cm.sub(1).num_cells() == 16);
  CHECK(cm.sub(2).num_cells() == 8);
  CHECK(cm.interface().size() == 4);
  CHECK(cm.h() == doctest::Approx(0.5));
  for (const auto& p : cm.interface()) {
    CHECK(p.measure == doctest::Approx(0.5));
    // Paired facet midpoints coincide (facets stored with shared endpoints).
    const double mx = 0.5 * (p.p0[0] + p.p1[0]);
    CHECK(mx > 1.0);
    CHECK(mx < 3.0);
    CHECK(p.p0[1] == 0.0);
    CHECK(p.normal1[1] == -1.0);
  }
  // Every boundary facet carries exactly one tag; count them per subdomain.
  CHECK(cm.sub(1).boundary_facets().size() == 2 * 8 + 2 * 2);
  CHECK(cm.sub(2).boundary_facets().size() == 2 * 4 + 2 * 2);
  int inflow = 0, outflow = 0, iface = 0, wall = 0;
  for (const auto& f : cm.sub(1).boundary_facets()) {
    switch (f.tag) {
      case BoundaryTag::inflow: ++inflow; break;
      case BoundaryTag::outflow: ++outflow; break;
      case BoundaryTag::interface_: ++iface; break;
      case BoundaryTag::dirichlet: ++wall; break;
    }
  }
  CHECK(inflow == 2);
  CHECK(outflow == 2);
  CHECK(iface == 4);
  CHECK(wall == 12);

  CHECK_THROWS_AS(build_two_pipe_mesh(1), MeshSizeError);

  auto j = cm.to_json();
  CHECK(j["subdomain1"]["cells"].size() == 16);
  CHECK(j["interface_pairs"].size() == 4);
}

TEST_CASE("quadrature and basis tables integrate polynomials exactly") {
  for (int r = 1; r <= 3; ++r) {
    auto mesh = SubdomainMesh::interval(0.0, 1.0, 3, BoundaryTag::dirichlet,
                                        BoundaryTag::dirichlet);
    FESpace s(mesh, r, 1, {});
    // interpolate x^r and integrate its square: exact for the cell rule.
    auto coeffs = s.interpolate([&](double x, double) {
      Eigen::VectorXd v(1);
      v[0] = std::pow(x, r);
      return v;
    });
    const double l2 = coupled_norm(build_coupled_mesh_1d(0.5, 0.25), s, coeffs, s, coeffs,
                                   NormKind::l2_domain);
    // \int_0^1 x^{2r} dx twice (both arguments use the same space).
    CHECK(l2 == doctest::Approx(std::sqrt(2.0 / (2 * r + 1))).epsilon(1e-12));
  }
}

TEST_CASE("mass and stiffness matrices on a single 1D cell") {
  auto mesh = SubdomainMesh::interval(0.0, 1.0, 1, BoundaryTag::dirichlet,
                                      BoundaryTag::dirichlet);
  FESpace s(mesh, 1, 1, {});
  auto M = mass_matrix(s);
  auto K = stiffness_matrix(s);
  // Hand values: M = [[1/3,1/6],[1/6,1/3]], K = [[1,-1],[-1,1]].
  Eigen::VectorXd e0(2), e1(2);
  e0 << 1.0, 0.0;
  e1 << 0.0, 1.0;
  CHECK(M.apply(e0)[0] == doctest::Approx(1.0 / 3));
  CHECK(M.apply(e1)[0] == doctest::Approx(1.0 / 6));
  CHECK(K.apply(e0)[0] == doctest::Approx(1.0));
  CHECK(K.apply(e1)[0] == doctest::Approx(-1.0));
}

TEST_CASE("openmp assembly is bit-identical to serial") {
  auto cm = build_two_pipe_mesh(3);
  FESpace v(cm.sub(1), 2, 2, {BoundaryTag::dirichlet, BoundaryTag::inflow});
  FESpace p(cm.sub(1), 1, 1, {});
  CHECK(mass_matrix(v, ExecMode::serial) == mass_matrix(v, ExecMode::openmp));
  CHECK(stiffness_matrix(v, ExecMode::serial) == stiffness_matrix(v, ExecMode::openmp));
  CHECK(symgrad_matrix(v, ExecMode::serial) == symgrad_matrix(v, ExecMode::openmp));
  CHECK(div_matrix(p, v, ExecMode::serial) == div_matrix(p, v, ExecMode::openmp));
  auto f = [](double x, double y) { return Eigen::Vector2d(std::sin(x), x * y).eval(); };
  Eigen::VectorXd a = source_vector(v, f, ExecMode::serial);
  Eigen::VectorXd b = source_vector(v, f, ExecMode::openmp);
  CHECK((a - b).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("divergence matrix against a linear field") {
  auto cm = build_two_pipe_mesh(2);
  FESpace vel(cm.sub(2), 2, 2, {});
  FESpace pres(cm.sub(2), 1, 1, {});
  auto B = div_matrix(pres, vel);
  // u = (x, 0) has div u = 1, so B u must equal the load vector of 1.
  auto u = vel.interpolate([](double x, double) { return Eigen::Vector2d(x, 0.0).eval(); });
  auto ones = source_vector(pres, [](double, double) {
    Eigen::VectorXd v(1);
    v[0] = 1.0;
    return v;
  });
  CHECK((B.apply(u) - ones).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("norm kinds") {
  auto cm = build_coupled_mesh_1d(0.5, 0.125);
  FESpace s1(cm.sub(1), 1, 1, {});
  FESpace s2(cm.sub(2), 1, 1, {});
  Eigen::VectorXd z1 = Eigen::VectorXd::Zero(s1.num_dofs());
  Eigen::VectorXd z2 = Eigen::VectorXd::Zero(s2.num_dofs());
  CHECK(coupled_norm(cm, s1, z1, s2, z2, NormKind::l2_domain) == 0.0);
  CHECK(coupled_norm(cm, s1, z1, s2, z2, NormKind::triple) == 0.0);

  auto id = [](double x, double) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return v;
  };
  auto u1 = s1.interpolate(id);
  auto u2 = s2.interpolate(id);
  // Continuous across the interface: zero jump.
  CHECK(coupled_norm(cm, s1, u1, s2, u2, NormKind::interface_l2_jump) <= 1e-14);
  // nu = (1,1), no penalty: the triple norm of u = x is 1.
  CHECK(coupled_norm(cm, s1, u1, s2, u2, NormKind::triple, {1.0, 1.0, 0.0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interface jump and trace matrices on the two-pipe mesh") {
  auto cm = build_two_pipe_mesh(2);
  FESpace s1(cm.sub(1), 2, 1, {});
  FESpace s2(cm.sub(2), 2, 1, {});
  // A function continuous across the interface has zero jump norm.
  auto fn = [](double x, double y) {
    Eigen::VectorXd v(1);
    v[0] = std::cos(x) * (1.0 + y);
    return v;
  };
  auto u1 = s1.interpolate(fn);
  auto u2 = s2.interpolate(fn);
  CHECK(coupled_norm(cm, s1, u1, s2, u2, NormKind::interface_l2_jump) <= 1e-13);

  // <1, 1>_Gamma equals the interface length 2.
  auto T11 = interface_mass(cm, s1, 1, s1, 1);
  auto ones1 = s1.interpolate([](double, double) {
    Eigen::VectorXd v(1);
    v[0] = 1.0;
    return v;
  });
  CHECK(ones1.dot(T11.apply(ones1)) == doctest::Approx(2.0).epsilon(1e-12));

  // Flux matrix: <d(trial)/dn2, test> with trial = y on side 2, n2 = (0,1)
  // gives <1, test>, again summing to 2.
  auto F12 = interface_flux_grad(cm, s1, 1, s2, 2);
  auto ys = s2.interpolate([](double, double y) {
    Eigen::VectorXd v(1);
    v[0] = y;
    return v;
  });
  CHECK(ones1.dot(F12.apply(ys)) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("l2 projection") {
  auto cm = build_coupled_mesh_1d(0.5, 0.125);
  FESpace s(cm.sub(2), 1, 1, {});
  auto c = l2_projection(s, [](double, double) {
    Eigen::VectorXd v(1);
    v[0] = 3.5;
    return v;
  });
  for (int i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(3.5).epsilon(1e-12));

  // Degree <= order polynomials are reproduced.
  auto lin = l2_projection(s, [](double x, double) {
    Eigen::VectorXd v(1);
    v[0] = 2.0 * x - 0.75;
    return v;
  });
  CHECK(l2_error(s, lin, [](double x, double) {
          Eigen::VectorXd v(1);
          v[0] = 2.0 * x - 0.75;
          return v;
        }) <= 1e-12);

  // Smooth target: L2 rate order+1 under h halving.
  auto smooth = [](double x, double) {
    Eigen::VectorXd v(1);
    v[0] = std::sin(2.0 * M_PI * x);
    return v;
  };
  double prev = 0.0;
  for (int lvl = 0; lvl < 3; ++lvl) {
    const double h = 0.5 / (8 << lvl);
    auto cml = build_coupled_mesh_1d(0.5, h);
    FESpace sl(cml.sub(2), 1, 1, {});
    const double err = l2_error(sl, l2_projection(sl, smooth), smooth);
    if (lvl > 0) CHECK(std::log2(prev / err) == doctest::Approx(2.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("ritz projection") {
  SUBCASE("in-space functions are reproduced exactly") {
    auto cm = build_coupled_mesh_1d(0.5, 0.25);
    // u = x(1-x) is boundary compatible and lies in the order-2 space.
    auto grad = [](int, double x, double) {
      Eigen::MatrixXd g(1, 1);
      g(0, 0) = 1.0 - 2.0 * x;
      return g;
    };
    auto field = ritz_projection(cm, 2, 1, grad);
    FESpace s1(cm.sub(1), 2, 1, {});
    FESpace s2(cm.sub(2), 2, 1, {});
    auto exact = [](double x, double) {
      Eigen::VectorXd v(1);
      v[0] = x * (1.0 - x);
      return v;
    };
    CHECK(l2_error(s1, field.u1, exact) <= 1e-10);
    CHECK(l2_error(s2, field.u2, exact) <= 1e-10);
  }
  SUBCASE("interface trace jump vanishes and H1 rate is 1 for r=1") {
    auto grad = [](int, double x, double) {
      Eigen::MatrixXd g(1, 1);
      g(0, 0) = M_PI * std::cos(M_PI * x);
      return g;
    };
    auto gradfn = [](double x, double) {
      Eigen::MatrixXd g(1, 1);
      g(0, 0) = M_PI * std::cos(M_PI * x);
      return g;
    };
    double prev = 0.0;
    for (int lvl = 0; lvl < 3; ++lvl) {
      const double h = 0.5 / (4 << lvl);
      auto cm = build_coupled_mesh_1d(0.5, h);
      auto field = ritz_projection(cm, 1, 1, grad);
      FESpace s1(cm.sub(1), 1, 1, {});
      FESpace s2(cm.sub(2), 1, 1, {});
      const double jump = coupled_norm(cm, s1, field.u1, s2, field.u2,
                                       NormKind::interface_l2_jump);
      CHECK(jump <= 1e-12);
      const double err = std::hypot(h1_semi_error(s1, field.u1, gradfn),
                                    h1_semi_error(s2, field.u2, gradfn));
      if (lvl > 0) CHECK(std::log2(prev / err) == doctest::Approx(1.0).epsilon(0.1));
      prev = err;
    }
  }
  SUBCASE("divergence-free ritz: discrete divergence vanishes, traces agree") {
    auto cm = build_two_pipe_mesh(2);
    // u = (y, x) is divergence free with gradient [[0,1],[1,0]].
    auto grad = [](int, double, double) {
      Eigen::MatrixXd g(2, 2);
      g << 0.0, 1.0, 1.0, 0.0;
      return g;
    };
    auto field = stokes_ritz_projection(cm, 2, grad);
    FESpace v1(cm.sub(1), 2, 2, {});
    FESpace v2(cm.sub(2), 2, 2, {});
    CHECK(coupled_norm(cm, v1, field.u1, v2, field.u2, NormKind::interface_l2_jump) <= 1e-12);
    // (div Ru, psi) = 0 for every merged multiplier test function except the
    // pinned one.
    FESpace q1(cm.sub(1), 1, 1, {});
    FESpace q2(cm.sub(2), 1, 1, {});
    MergedNodes mq(cm, q1, q2);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(mq.count());
    Eigen::VectorXd r1 = div_matrix(q1, v1).apply(field.u1);
    Eigen::VectorXd r2 = div_matrix(q2, v2).apply(field.u2);
    for (int i = 0; i < q1.num_dofs(); ++i) r[mq.merged(1, i)] += r1[i];
    for (int i = 0; i < q2.num_dofs(); ++i) r[mq.merged(2, i)] += r2[i];
    for (int i = 1; i < mq.count(); ++i) CHECK(std::abs(r[i]) <= 1e-9);
  }
}
