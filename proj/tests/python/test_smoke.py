# Copyright 2026 The Edgepart Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import edgepart


def make_devices(n=2, deadline_s=0.2, eps=0.05, bandwidth_hz=5e6, seed=3):
    cfg = edgepart.ScenarioConfig()
    cfg.n_devices = n
    cfg.bandwidth_hz = bandwidth_hz
    cfg.profile = "alexnet_xavier_nx_cpu"
    cfg.epsilon = eps
    cfg.deadline_s = deadline_s
    cfg.master_seed = seed
    return edgepart.generate_scenario(cfg)


def test_version_and_profiles():
    assert edgepart.__version__
    names = edgepart.builtin_profile_names()
    assert set(names) == {
        "alexnet_xavier_nx_cpu",
        "resnet152_xavier_nx_gpu",
        "vit_b32_nano_gpu",
    }
    alex = edgepart.builtin_profile("alexnet_xavier_nx_cpu")
    assert alex.num_blocks == 8
    b3 = alex.block(3)
    assert b3.out_data_bits == pytest.approx(0.53 * 8e6)
    assert b3.throughput_flops_per_cycle == pytest.approx(13.6064)


def test_dispersion_multiplier_and_bound():
    assert edgepart.sigma_of(0.5) == pytest.approx(1.0)
    assert edgepart.sigma_of(0.05) == pytest.approx(math.sqrt(19.0))
    bound = edgepart.ecr_bound([1.0], [1.0], [[0.04]], 0.2)
    assert bound == pytest.approx(1.4)
    with pytest.raises(edgepart.ValidationError):
        edgepart.sigma_of(1.5)


def test_scenario_and_model_formulas():
    devices = make_devices()
    assert len(devices) == 2
    assert devices[0].profile_name == "alexnet_xavier_nx_cpu"
    eta = edgepart.spectral_efficiency(devices[0], 1e6)
    assert eta > 0.0
    t = edgepart.expected_total_time(devices[0], 4, 2e6, 8e8)
    assert 0.0 < t < 1.0
    assert edgepart.path_loss_db(100.0) == pytest.approx(98.0)


def test_solve_and_orderings():
    devices = make_devices()
    robust = edgepart.solve("robust", devices, 5e6)
    mean = edgepart.solve("mean_value", devices, 5e6)
    worst = edgepart.solve("worst_case", devices, 5e6)
    assert mean.expected_energy_j <= robust.expected_energy_j + 1e-9
    assert robust.expected_energy_j <= worst.expected_energy_j + 1e-9
    assert len(robust.points) == 2
    for n, point in enumerate(robust.points):
        slack = edgepart.deadline_slack(
            devices[n], point, robust.allocation.bandwidth_hz[n],
            robust.allocation.frequency_hz[n])
        assert slack >= -1e-6


def test_allocation_solver():
    devices = make_devices()
    alloc, energy = edgepart.solve_ra(devices, [4, 4], 5e6)
    assert energy > 0.0
    assert sum(alloc.bandwidth_hz) <= 5e6 * (1 + 1e-9)


def test_evaluation_and_determinism():
    devices = make_devices()
    robust = edgepart.solve("robust", devices, 5e6)
    rep1 = edgepart.evaluate(robust, devices, n_samples=2000, seed=9)
    rep2 = edgepart.evaluate(robust, devices, n_samples=2000, seed=9)
    assert rep1.violation_aggregate == rep2.violation_aggregate
    assert rep1.violation_aggregate <= devices[0].epsilon
    assert rep1.mean_realized_energy_j == pytest.approx(
        rep1.expected_energy_j, rel=0.1)


def test_sweep_csv_roundtrip():
    devices = make_devices()
    csv1 = edgepart.sweep_csv(devices, 5e6, ["robust"], epsilon_grid=[0.05],
                              n_samples=1000, seed=5)
    csv2 = edgepart.sweep_csv(devices, 5e6, ["robust"], epsilon_grid=[0.05],
                              n_samples=1000, seed=5)
    assert csv1 == csv2
    assert csv1.startswith("scenario,policy,epsilon,deadline_ms,device,")


def test_infeasible_raises():
    devices = make_devices(deadline_s=0.001)
    with pytest.raises(edgepart.InfeasibleError):
        edgepart.solve("robust", devices, 5e6)


def test_fixture_bundle_and_fit(tmp_path):
    written = edgepart.bundle_fixtures(str(tmp_path))
    assert len(written) == 7
    trace = tmp_path / "alexnet_xavier_nx_cpu_trace.csv"
    assert trace.exists()
    alex = edgepart.builtin_profile("alexnet_xavier_nx_cpu")
    g, residual = edgepart.fit_throughput(
        str(trace), 2, alex.block(2).cum_workload_flops, 1e8, 1.2e9)
    assert g == pytest.approx(alex.block(2).throughput_flops_per_cycle, rel=1e-6)
    assert residual == pytest.approx(9.7e-4, rel=1e-5)
    loaded = edgepart.load_profile(str(tmp_path / "vit_b32_nano_gpu.json"))
    assert loaded.num_blocks == 6
