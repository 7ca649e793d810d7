"""Whole-stack acceptance gate.

Each test checks one headline guarantee of the package and prints a
single ``criterion NN: PASS/FAIL`` line straight to the terminal, so the
complete gate can be read off any pytest run at a glance.

The shared workload is a 20-instance batch of complete 6-vertex graphs
grown to depth 12 by both algorithms (the dynamic arm with a
per-instance delta2 search) next to a rounded-relaxation baseline;
module-scoped fixtures build all of it once.  The noisy-growth
cross-check inside criterion 10 runs ten full density-matrix growths
and dominates the runtime of the whole suite.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from adaptcut import (
    AdaptConfig,
    AnsatzLayer,
    Ansatz,
    Gate,
    MaxCutInstance,
    Mixer,
    QuantumState,
    brute_force_max_cut,
    build_hamiltonian,
    build_noise_curve,
    cnot_count,
    compile_ansatz,
    critical_error_probability,
    derive_seed,
    energy_variation,
    evolve_ansatz_vec,
    expected_cut,
    fidelity_with_pure,
    gamma_histogram,
    generate_instance,
    hyperplane_round,
    mitigated_curve,
    mixer_pool,
    noisy_growth,
    replay_with_noise,
    richardson_mitigate,
    run_adapt,
    simulate_noisy,
    simulate_pure,
    skip_coefficients,
    solve_relaxation,
    split_hamiltonian,
    tune_delta2,
    variant_comparison,
)

from oracles import dense_circuit, plus_vector, random_pure_state

DEPTH = 12
N_BATCH = 20
NOISE_PS = (0.00122, 0.00263)
GW_ROUNDS = 2000
# open-ended sweep for the per-instance skip threshold; the tiny entries
# admit the idealized skip once the state has collapsed onto a cut, the
# large ones keep the guard strict while signal is still present
DELTA2_GRID = (1e-20, 1e-19, 1e-18, 1e-16, 1e-7, 1e-5)


def _mean(xs) -> float:
    return float(np.mean(np.asarray(xs, dtype=float)))


def _stderr(xs) -> float:
    xs = np.asarray(xs, dtype=float)
    return float(xs.std(ddof=1) / math.sqrt(len(xs)))


@pytest.fixture
def report(capfd):
    """Emit one summary line per criterion, bypassing output capture."""

    def emit(line: str):
        with capfd.disabled():
            print(f"\n{line}", flush=True)

    return emit


# ── shared batch fixtures ─────────────────────────────────────────────────


@pytest.fixture(scope="module")
def batch6():
    return [generate_instance(6, seed=s) for s in range(N_BATCH)]


@pytest.fixture(scope="module")
def dyn_records(batch6):
    # final energies tie across the delta2 grid once the optimizer has
    # converged, so the fewest-CNOT tie-break prunes redundant cost layers
    out = []
    for s, inst in enumerate(batch6):
        cfg = AdaptConfig(
            max_layers=DEPTH, optimizer_restarts=2, seed=derive_seed(29, s)
        )
        rec, _ = tune_delta2(inst, cfg, grid=DELTA2_GRID)
        out.append(rec)
    return out


@pytest.fixture(scope="module")
def std_records(batch6):
    return [
        run_adapt(
            inst,
            AdaptConfig(
                variant="standard",
                max_layers=DEPTH,
                optimizer_restarts=2,
                seed=derive_seed(31, s),
            ),
        )
        for s, inst in enumerate(batch6)
    ]


@pytest.fixture(scope="module")
def gw_alphas(batch6):
    vals = []
    for s, inst in enumerate(batch6):
        emb = solve_relaxation(inst, seed=derive_seed(41, s))
        rounded = hyperplane_round(
            inst, emb, rounds=GW_ROUNDS, seed=derive_seed(41, s, 1)
        )
        vals.append(rounded.mean_value / brute_force_max_cut(inst).value)
    return vals


@pytest.fixture(scope="module")
def growth_comparison():
    """Ten instances grown noiselessly and under noise with matched settings."""
    p = NOISE_PS[0]
    noisy_rows, replay_rows = [], []
    for s in range(10):
        inst = generate_instance(6, seed=s)
        cfg = AdaptConfig(
            max_layers=DEPTH, optimizer_restarts=0, seed=derive_seed(53, s)
        )
        base = run_adapt(inst, cfg)
        noisy = noisy_growth(inst, cfg, p)
        noisy_rows.append(np.asarray(noisy.alphas(), dtype=float))
        replay_rows.append(np.asarray(replay_with_noise(base, None, p), dtype=float))
    return np.array(noisy_rows), np.array(replay_rows)


# ── criterion 1: simulator against a dense oracle ─────────────────────────


def _random_circuit(rng, n: int, depth: int = 30) -> list:
    gates = []
    for _ in range(depth):
        kind = ("CNOT", "H", "S", "SDG", "RX", "RY", "RZ")[int(rng.integers(0, 7))]
        if kind == "CNOT":
            c = int(rng.integers(0, n))
            t = int((c + 1 + rng.integers(0, n - 1)) % n)
            gates.append(Gate.cnot(c, t))
        elif kind in ("RX", "RY", "RZ"):
            q = int(rng.integers(0, n))
            gates.append(Gate(kind, (q,), float(rng.uniform(-math.pi, math.pi))))
        else:
            gates.append(Gate(kind, (int(rng.integers(0, n)),)))
    return gates


def test_criterion_01_simulator_matches_dense_oracle(report):
    """Random 4-qubit circuits: pure evolver vs dense matrices, noiseless channel."""
    rng = np.random.default_rng(101)
    n = 4
    worst_err = 0.0
    worst_fid = 1.0
    for _ in range(100):
        gates = _random_circuit(rng, n)
        ref = dense_circuit(gates, n) @ plus_vector(n)
        psi = simulate_pure(gates, n).data
        worst_err = max(worst_err, float(np.linalg.norm(psi - ref)))
        rho = simulate_noisy(gates, n, 0.0)
        worst_fid = min(worst_fid, fidelity_with_pure(rho, ref))
    ok = worst_err <= 1e-10 and worst_fid >= 1.0 - 1e-10
    report(
        f"criterion 01: {'PASS' if ok else 'FAIL'} "
        f"(max state error {worst_err:.2e}, min zero-noise fidelity defect "
        f"{1.0 - worst_fid:.2e} over 100 circuits)"
    )
    assert worst_err <= 1e-10
    assert worst_fid >= 1.0 - 1e-10


# ── criterion 2: selection identities ─────────────────────────────────────


def test_criterion_02_energy_response_identities(report):
    """Closed-form beta response and the two gamma-derivative coefficients."""
    rng = np.random.default_rng(202)
    pool = [m for m in mixer_pool(4) if not m.is_global]
    worst_id = worst_c = worst_d = 0.0
    h = 1e-4
    for trial in range(100):
        inst = generate_instance(4, seed=1000 + trial)
        ham = build_hamiltonian(inst)
        psi = random_pure_state(4, rng)
        mixer = pool[int(rng.integers(0, len(pool)))]
        beta = float(rng.uniform(-1.5, 1.5))
        gamma = float(rng.uniform(-1.2, 1.2))
        h_comm, h_anti = split_hamiltonian(ham, mixer)
        e_minus = float(np.real(np.vdot(psi, h_comm.diagonal * psi)))
        e_plus = float(np.real(np.vdot(psi, h_anti.diagonal * psi)))

        co = skip_coefficients(psi, mixer, h_anti, gamma)
        pred = e_minus + e_plus * math.cos(2 * beta) + co.b * math.sin(2 * beta)
        got = energy_variation(psi, ham, mixer, beta, gamma)
        worst_id = max(worst_id, abs(got - pred))

        # c must be half the gamma-slope of b, d minus half the slope of c
        b_p = skip_coefficients(psi, mixer, h_anti, gamma + h).b
        b_m = skip_coefficients(psi, mixer, h_anti, gamma - h).b
        worst_c = max(worst_c, abs(co.c - 0.5 * (b_p - b_m) / (2 * h)))
        c_p = skip_coefficients(psi, mixer, h_anti, gamma + h).c
        c_m = skip_coefficients(psi, mixer, h_anti, gamma - h).c
        worst_d = max(worst_d, abs(co.d + 0.5 * (c_p - c_m) / (2 * h)))
    ok = worst_id <= 1e-8 and worst_c <= 1e-6 and worst_d <= 1e-6
    report(
        f"criterion 02: {'PASS' if ok else 'FAIL'} "
        f"(identity error {worst_id:.2e}, slope errors c {worst_c:.2e} / "
        f"d {worst_d:.2e} over 100 tuples)"
    )
    assert worst_id <= 1e-8
    assert worst_c <= 1e-6
    assert worst_d <= 1e-6


# ── criterion 3: every fired skip is locally optimal ──────────────────────


def test_criterion_03_skips_sit_at_local_minima(dyn_records, report):
    """Audit each skipped layer with a 41-point scan of the best-beta energy."""
    grid = np.linspace(-0.2, 0.2, 41)
    checked = violations = 0
    for rec in dyn_records:
        ham = build_hamiltonian(rec.instance)
        for p, it in enumerate(rec.iterations, start=1):
            if not it.skipped:
                continue
            if p == 1:
                state = QuantumState.plus_state(rec.n).data
            else:
                state = evolve_ansatz_vec(rec.build_prefix(p - 1), ham)
            mixer = Mixer.from_text(it.mixer)
            h_comm, h_anti = split_hamiltonian(ham, mixer)
            e_minus = float(np.real(np.vdot(state, h_comm.diagonal * state)))
            e_plus = float(np.real(np.vdot(state, h_anti.diagonal * state)))
            f = np.array(
                [
                    e_minus
                    - math.sqrt(
                        e_plus**2 + skip_coefficients(state, mixer, h_anti, g).b ** 2
                    )
                    for g in grid
                ]
            )
            checked += 1
            # center of the scan is the gamma = 0 grid point
            if not (f[20] <= f[19] + 1e-12 and f[20] <= f[21] + 1e-12):
                violations += 1
    ok = checked > 0 and violations == 0
    report(
        f"criterion 03: {'PASS' if ok else 'FAIL'} "
        f"({checked} fired skips audited, {violations} counterexamples)"
    )
    assert checked > 0
    assert violations == 0


# ── criterion 4: CNOT accounting ──────────────────────────────────────────


def test_criterion_04_cnot_budget(report):
    """Complete-graph cost layers and the two-qubit mixer surcharge."""
    results = []
    ok = True
    for n, want in ((6, 30), (8, 56), (10, 90)):
        ham = build_hamiltonian(generate_instance(n, seed=0))
        single = Ansatz(
            n,
            (AnsatzLayer(mixer=Mixer.pauli("X0"), beta=0.3, has_cost=True, gamma=0.25),),
        )
        double = Ansatz(
            n,
            (
                AnsatzLayer(
                    mixer=Mixer.pauli("Y0*X1"), beta=0.3, has_cost=True, gamma=0.25
                ),
            ),
        )
        got = cnot_count(compile_ansatz(single, ham))
        got2 = cnot_count(compile_ansatz(double, ham))
        results.append(f"n={n}: {got}/{want}+{got2 - got}")
        ok = ok and got == want and got2 == got + 2
    report(f"criterion 04: {'PASS' if ok else 'FAIL'} ({', '.join(results)})")
    assert ok


# ── criterion 5: beats the rounding baseline, cheaply ─────────────────────


def _mean_curves(records):
    depth = min(len(r.iterations) for r in records)
    a = np.array([r.alphas()[:depth] for r in records], dtype=float)
    c = np.array([r.cnot_counts()[:depth] for r in records], dtype=float)
    return a.mean(axis=0), c.mean(axis=0)


def _crossing_cnots(records, baseline: float):
    """Mean CNOTs at the first depth whose mean ratio reaches the baseline."""
    alphas, cnots = _mean_curves(records)
    for k in range(len(alphas)):
        if alphas[k] >= baseline:
            return float(cnots[k])
    return None


def test_criterion_05_quality_and_crossing_cost(
    dyn_records, std_records, gw_alphas, report
):
    """Final mean ratio at least the rounding mean; crossing needs <=40% the CNOTs."""
    mean_dyn = _mean([r.alphas()[-1] for r in dyn_records])
    mean_gw = _mean(gw_alphas)
    x_dyn = _crossing_cnots(dyn_records, mean_gw)
    x_std = _crossing_cnots(std_records, mean_gw)
    crossing_ok = x_dyn is not None and x_std is not None and x_dyn <= 0.4 * x_std
    ok = mean_dyn >= mean_gw and crossing_ok
    report(
        f"criterion 05: {'PASS' if ok else 'FAIL'} "
        f"(mean ratio {mean_dyn:.4f} vs baseline {mean_gw:.4f}; crossing CNOTs "
        f"{x_dyn} vs {x_std})"
    )
    assert mean_dyn >= mean_gw
    assert crossing_ok


# ── criterion 6: cost-layer economy ───────────────────────────────────────


def test_criterion_06_cost_layer_economy(dyn_records, std_records, report):
    """Near-zero cost angles are common; the dynamic rule drops half the layers."""
    hist = gamma_histogram(std_records)
    dyn_cost = sum(int(it.has_cost) for r in dyn_records for it in r.iterations)
    std_cost = sum(int(it.has_cost) for r in std_records for it in r.iterations)
    ok = hist.near_zero_fraction >= 0.5 and dyn_cost <= 0.5 * std_cost
    report(
        f"criterion 06: {'PASS' if ok else 'FAIL'} "
        f"(near-zero fraction {hist.near_zero_fraction:.3f}, cost layers "
        f"{dyn_cost} vs {std_cost})"
    )
    assert hist.near_zero_fraction >= 0.5
    assert dyn_cost <= 0.5 * std_cost


# ── criterion 7: noise ordering under replay ──────────────────────────────


def _alpha_star_mean(records, p: float) -> float:
    return _mean([max(replay_with_noise(r, None, p)) for r in records])


def test_criterion_07_noise_ordering(dyn_records, std_records, report):
    """Peak replay ratios: dynamic >= standard at both rates, decreasing in p."""
    ps = (0.0,) + NOISE_PS
    dyn = [_alpha_star_mean(dyn_records, p) for p in ps]
    std = [_alpha_star_mean(std_records, p) for p in ps]
    beats = all(dyn[k] >= std[k] for k in (1, 2))
    decreasing = dyn[0] > dyn[1] > dyn[2] and std[0] > std[1] > std[2]
    ok = beats and decreasing
    report(
        f"criterion 07: {'PASS' if ok else 'FAIL'} "
        f"(dynamic {dyn[0]:.4f}/{dyn[1]:.4f}/{dyn[2]:.4f}, "
        f"standard {std[0]:.4f}/{std[1]:.4f}/{std[2]:.4f} at p=0/"
        f"{NOISE_PS[0]}/{NOISE_PS[1]})"
    )
    assert beats
    assert decreasing


# ── criterion 8: crossover error rate ─────────────────────────────────────


def test_criterion_08_crossover_error_rate(
    batch6, dyn_records, std_records, report
):
    """p* in the expected window, and later for the dynamic algorithm."""
    res_dyn = critical_error_probability(
        batch6,
        AdaptConfig(variant="dynamic", max_layers=DEPTH),
        records=dyn_records,
        gw_rounds=GW_ROUNDS,
        gw_seed=47,
    )
    res_std = critical_error_probability(
        batch6,
        AdaptConfig(variant="standard", max_layers=DEPTH),
        records=std_records,
        gw_rounds=GW_ROUNDS,
        gw_seed=47,
    )
    in_window = 0.005 <= res_dyn.p_star <= 0.03
    ordered = res_dyn.p_star > res_std.p_star
    ok = in_window and ordered
    report(
        f"criterion 08: {'PASS' if ok else 'FAIL'} "
        f"(p* dynamic {res_dyn.p_star:.4g} +/- {res_dyn.stderr:.1g}, "
        f"standard {res_std.p_star:.4g} +/- {res_std.stderr:.1g})"
    )
    assert in_window
    assert ordered


# ── criterion 9: rounding baseline quality ────────────────────────────────


def test_criterion_09_rounding_baseline(report):
    """Relaxation upper-bounds every optimum; mean ratio and rounding stats."""
    alphas = []
    worst_margin = math.inf
    for s in range(100, 200):
        inst = generate_instance(6, seed=s)
        emb = solve_relaxation(inst, seed=derive_seed(43, s))
        v_max = brute_force_max_cut(inst).value
        worst_margin = min(worst_margin, emb.objective - v_max)
        rounded = hyperplane_round(
            inst, emb, rounds=GW_ROUNDS, seed=derive_seed(43, s, 1)
        )
        alphas.append(rounded.mean_value / v_max)
    mean_alpha = _mean(alphas)

    # sampled rounding mean must sit within 3 sigma of the closed form
    tri = MaxCutInstance(3, np.array([[0.0, 1, 1], [1, 0, 1], [1, 1, 0]]))
    emb_t = solve_relaxation(tri, seed=7)
    rounded_t = hyperplane_round(tri, emb_t, rounds=10_000, seed=11)
    tri_gap = abs(rounded_t.mean_value - expected_cut(tri, emb_t))
    tri_ok = tri_gap <= 3.0 * rounded_t.stderr + 1e-12

    ok = 0.87 <= mean_alpha <= 1.0 and worst_margin >= -1e-9 and tri_ok
    report(
        f"criterion 09: {'PASS' if ok else 'FAIL'} "
        f"(mean ratio {mean_alpha:.4f} over 100 graphs, worst relaxation margin "
        f"{worst_margin:.1e}, triangle gap {tri_gap:.2e} vs 3 sigma "
        f"{3.0 * rounded_t.stderr:.2e})"
    )
    assert 0.87 <= mean_alpha <= 1.0
    assert worst_margin >= -1e-9
    assert tri_ok


# ── criterion 10: ablation, noisy-growth cross-check, extrapolation ───────


def test_criterion_10_consistency_checks(
    batch6, dyn_records, growth_comparison, report
):
    """Three consistency checks on the surrounding study machinery."""
    # (a) the full rule should leave the smallest residual at final depth
    table = variant_comparison(
        batch6, AdaptConfig(max_layers=DEPTH, optimizer_restarts=1, seed=67)
    )
    last = {variant: vals[-1] for variant, vals in table.items()}
    ablation_ok = (
        last["dynamic"] <= last["dynamic-nocost"]
        and last["dynamic"] <= last["dynamic-noreselect"]
    )

    # (b) noisy growth and noiseless replay agree within combined stderr
    noisy_rows, replay_rows = growth_comparison
    m = noisy_rows.shape[0]
    depth = min(noisy_rows.shape[1], replay_rows.shape[1])
    gaps, bars = [], []
    for k in range(depth):
        ng, rp = noisy_rows[:, k], replay_rows[:, k]
        gaps.append(abs(ng.mean() - rp.mean()))
        bars.append(_stderr(ng) + _stderr(rp))
    overlap_ok = all(g <= b for g, b in zip(gaps, bars))
    worst_k = int(np.argmax(np.array(gaps) - np.array(bars)))

    # (c) extrapolation is exact on affine decay and not harmful on real data
    affine = abs(
        richardson_mitigate(0.91 - 4.0 * 0.001, 0.91 - 4.0 * 0.002, 2.0) - 0.91
    )
    curve_p = build_noise_curve(dyn_records, NOISE_PS[0])
    curve_cp = build_noise_curve(dyn_records, 2.0 * NOISE_PS[0])
    mit = mitigated_curve(curve_p, curve_cp, 2.0)
    raw_mean = _mean([pt[1] for pt in curve_p.points])
    mit_mean = _mean([pt[1] for pt in mit.points])
    zne_ok = affine <= 1e-12 and mit_mean >= raw_mean - 1e-12

    ok = ablation_ok and overlap_ok and zne_ok
    report(
        f"criterion 10: {'PASS' if ok else 'FAIL'} "
        f"(residuals full {last['dynamic']:.4f} / no-cost "
        f"{last['dynamic-nocost']:.4f} / no-reselect "
        f"{last['dynamic-noreselect']:.4f}; worst growth gap "
        f"{gaps[worst_k]:.4f} vs bar {bars[worst_k]:.4f}; mitigation "
        f"{raw_mean:.4f} -> {mit_mean:.4f})"
    )
    assert ablation_ok
    assert overlap_ok
    assert zne_ok
