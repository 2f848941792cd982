import os

# pin BLAS threads before numpy loads; the suite is dominated by small
# matrices where thread sync costs ~7x
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

from dataclasses import dataclass

import hypothesis
import numpy as np
import pytest

from qstab.certify import CertifyConfig, LyapunovCandidate, SamplerConfig, classify
from qstab.dynamics import IntegratorConfig, evolve_density
from qstab.hilbert import Operator, annihilation_op
from qstab.lindblad import SystemModel
from qstab.modelio import parse_init_spec
from qstab.presets import get_preset
from qstab.steady import DistanceConfig, InvariantSet, invariant_set

hypothesis.settings.register_profile(
    "qstab", max_examples=20, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("qstab")


@dataclass(frozen=True, eq=False)
class PresetBundle:
    name: str
    model: SystemModel
    params: dict
    v: Operator
    inv: InvariantSet
    a: Operator
    seed: int
    t_final: float
    dt: float


def _bundle(name: str) -> PresetBundle:
    preset = get_preset(name)
    model, params = preset.build_model()
    v = preset.build_lyapunov()
    inv = invariant_set(model)
    return PresetBundle(
        name=name,
        model=model,
        params=params,
        v=v,
        inv=inv,
        a=annihilation_op(model.dim),
        seed=preset.seed,
        t_final=preset.t_final,
        dt=preset.dt,
    )


@pytest.fixture(scope="session")
def ex1() -> PresetBundle:
    return _bundle("ex1")


@pytest.fixture(scope="session")
def ex2() -> PresetBundle:
    return _bundle("ex2")


def _report(bundle: PresetBundle):
    cfg = CertifyConfig(
        sampler=SamplerConfig(seed=bundle.seed),
        distance=DistanceConfig(opt_tol=1e-3, n_starts=2, maxiter=120, seed=bundle.seed + 1),
    )
    return classify(bundle.model, LyapunovCandidate(bundle.v, "preset"), bundle.inv, cfg)


@pytest.fixture(scope="session")
def ex1_report(ex1):
    return _report(ex1)


@pytest.fixture(scope="session")
def ex2_report(ex2):
    return _report(ex2)


def _trajectory(bundle: PresetBundle, init_spec: str):
    rho0 = parse_init_spec(init_spec, bundle.model.dim)
    cfg = IntegratorConfig(t_final=bundle.t_final, dt=bundle.dt)
    return evolve_density(bundle.model, rho0, cfg, [("a", bundle.a), ("V", bundle.v)])


@pytest.fixture(scope="session")
def ex1_traj(ex1):
    """Example-1 trajectory from the coherent state at -1."""
    return _trajectory(ex1, "coherent:-1+0i")


@pytest.fixture(scope="session")
def ex2_traj_vac(ex2):
    return _trajectory(ex2, "fock:0")


@pytest.fixture(scope="session")
def ex2_traj_coh(ex2):
    return _trajectory(ex2, "coherent:0.5+0i")


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = 0.5 * (g + g.conj().T)
    return scale * h / max(1.0, np.linalg.norm(h, 2))


def random_model(rng: np.random.Generator, dim: int, n_channels: int = 1) -> SystemModel:
    h = Operator(random_hermitian(rng, dim))
    ls = []
    for _ in range(n_channels):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        ls.append(Operator(g / max(1.0, np.linalg.norm(g, 2))))
    return SystemModel(hamiltonian=h, couplings=tuple(ls), label="random")
