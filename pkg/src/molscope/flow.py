"""Invertible coupling-layer flow over one-hot molecular graph tensors.

Architecture: the bond tensor runs through a stack of affine coupling layers
over its flattened coordinates with alternating even/odd binary masks; the
atom matrix runs through a stack of row-masked affine couplings whose
scale/shift networks see one round of adjacency-weighted neighbor averaging
through the bond tensor's relation channels, so atoms are transformed
conditioned on bonds. Scale outputs are squashed to |s| <= 5 for stability,
and coupling output weights start at zero, so a fresh model is the identity
map with zero log-determinant.

Encoding dequantizes the one-hot input with uniform noise in [0, gamma)
(deterministic mode uses the constant gamma/2), so decode(encode(x)) returns
the dequantized tensors exactly and their argmax recovers the original
discrete graph. Decoding inverts the bond stack first, discretizes the bond
block with the same rule the graph decoder uses, and then inverts the atom
stack conditioned on that discretized adjacency.

All math is float64. Randomness only ever comes from explicitly seeded
generators, so every operation is a pure function of its arguments.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch
from torch import nn

from molscope.molgraph import GraphTensors, discretize_bond_channels

__all__ = [
    "FlowConfig",
    "FlowModel",
    "LatentPoint",
    "TrainReport",
    "FlowConfigError",
    "FlowNumericsError",
    "TrainingDivergedError",
    "new_model",
    "encode",
    "encode_arrays",
    "decode",
    "decode_batch",
    "log_likelihood",
    "bits_per_dim",
    "train",
    "sample_latents",
]

S_CAP = 5.0
_DTYPE = torch.float64


class FlowConfigError(ValueError):
    """Invalid flow configuration."""


class FlowNumericsError(FloatingPointError):
    """A non-finite value appeared inside the flow."""


class TrainingDivergedError(FloatingPointError):
    """Training loss became non-finite."""


@dataclass(frozen=True)
class FlowConfig:
    """Shapes and hyperparameters of the flow.

    ``n_max``/``k``/``c`` match the graph tensor shapes; layer counts must be
    even so the alternating masks cover every coordinate.
    """

    n_max: int = 9
    k: int = 5
    c: int = 4
    n_bond_layers: int = 8
    n_atom_layers: int = 6
    hidden_width: int = 64
    dequant_gamma: float = 0.6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_max < 1 or self.k < 1 or self.c < 2:
            raise FlowConfigError(f"bad tensor shape: n_max={self.n_max} k={self.k} c={self.c}")
        for name in ("n_bond_layers", "n_atom_layers"):
            v = getattr(self, name)
            if v < 2 or v % 2 != 0:
                raise FlowConfigError(f"{name} must be even and >= 2, got {v}")
        if self.hidden_width < 1:
            raise FlowConfigError("hidden_width must be >= 1")
        if not (0.0 < self.dequant_gamma <= 1.0):
            raise FlowConfigError("dequant_gamma must be in (0, 1]")

    @property
    def atom_dim(self) -> int:
        return self.n_max * self.k

    @property
    def bond_dim(self) -> int:
        return self.c * self.n_max * self.n_max

    @property
    def latent_dim(self) -> int:
        return self.atom_dim + self.bond_dim


@dataclass(frozen=True)
class LatentPoint:
    """A point in the flow's latent space.

    Layout: the first n_max*k entries are the atom block (row-major), the
    remaining c*n_max^2 entries the bond block (channel-major).
    """

    z: np.ndarray

    def __post_init__(self) -> None:
        z = np.asarray(self.z, dtype=np.float64)
        if z.ndim != 1:
            raise ValueError(f"latent vector must be 1-D, got shape {z.shape}")
        if not np.all(np.isfinite(z)):
            raise ValueError("latent vector contains non-finite entries")
        z = z.copy()
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def dim(self) -> int:
        return self.z.shape[0]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LatentPoint) and np.array_equal(self.z, other.z)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class TrainReport:
    epoch: int
    nll_bits_per_dim: float
    grad_norm: float


def _squash(raw: torch.Tensor) -> torch.Tensor:
    return S_CAP * torch.tanh(raw / S_CAP)


class _BondCoupling(nn.Module):
    """Affine coupling over the flattened bond block with a fixed binary mask."""

    def __init__(self, dim: int, hidden: int, mask: torch.Tensor):
        super().__init__()
        self.register_buffer("mask", mask.to(_DTYPE))
        self.w1 = nn.Linear(dim, hidden, dtype=_DTYPE)
        self.w2 = nn.Linear(hidden, 2 * dim, dtype=_DTYPE)

    def scale_shift(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = torch.tanh(self.w1(x * self.mask))
        raw_s, raw_t = self.w2(h).chunk(2, dim=-1)
        um = 1.0 - self.mask
        return _squash(raw_s) * um, raw_t * um

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        s, t = self.scale_shift(x)
        return x * torch.exp(s) + t, s.sum(dim=-1)

    def inverse(self, y: torch.Tensor) -> torch.Tensor:
        s, t = self.scale_shift(y)  # masked coords of y equal those of x
        return (y - t) * torch.exp(-s)


class _AtomCoupling(nn.Module):
    """Row-masked affine coupling over the atom matrix, conditioned on bonds.

    The scale/shift network sees, per atom, its own (masked) channel vector
    concatenated with one adjacency-weighted neighbor average per bond
    relation channel; weights are shared across atoms.
    """

    def __init__(self, k: int, n_relations: int, hidden: int, row_mask: torch.Tensor):
        super().__init__()
        self.register_buffer("row_mask", row_mask.to(_DTYPE))
        self.w1 = nn.Linear(k * (1 + n_relations), hidden, dtype=_DTYPE)
        self.w2 = nn.Linear(hidden, 2 * k, dtype=_DTYPE)
        self.n_relations = n_relations

    def scale_shift(self, x: torch.Tensor, adjacency: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        # x: (B, n, k); adjacency: (B, n_relations, n, n)
        xin = x * self.row_mask.unsqueeze(-1)
        deg = adjacency.sum(dim=-1)  # (B, w, n)
        nb = torch.einsum("bwij,bjk->bwik", adjacency, xin) / (1.0 + deg).unsqueeze(-1)
        feats = torch.cat([xin] + [nb[:, w] for w in range(self.n_relations)], dim=-1)
        h = torch.tanh(self.w1(feats))
        raw_s, raw_t = self.w2(h).chunk(2, dim=-1)
        um = (1.0 - self.row_mask).unsqueeze(-1)
        return _squash(raw_s) * um, raw_t * um

    def forward(self, x: torch.Tensor, adjacency: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        s, t = self.scale_shift(x, adjacency)
        return x * torch.exp(s) + t, s.sum(dim=(-1, -2))

    def inverse(self, y: torch.Tensor, adjacency: torch.Tensor) -> torch.Tensor:
        s, t = self.scale_shift(y, adjacency)
        return (y - t) * torch.exp(-s)


class _FlowNet(nn.Module):
    def __init__(self, config: FlowConfig):
        super().__init__()
        bond_dim = config.bond_dim
        bond_layers = []
        for layer in range(config.n_bond_layers):
            mask = torch.tensor(
                [(1.0 if (i % 2 == layer % 2) else 0.0) for i in range(bond_dim)]
            )
            bond_layers.append(_BondCoupling(bond_dim, config.hidden_width, mask))
        self.bond_layers = nn.ModuleList(bond_layers)

        atom_layers = []
        for layer in range(config.n_atom_layers):
            row_mask = torch.tensor(
                [(1.0 if (i % 2 == layer % 2) else 0.0) for i in range(config.n_max)]
            )
            atom_layers.append(
                _AtomCoupling(config.k, config.c - 1, config.hidden_width, row_mask)
            )
        self.atom_layers = nn.ModuleList(atom_layers)


@dataclass(frozen=True)
class FlowModel:
    """An immutable flow: config plus the parameter container.

    encode/decode/log_likelihood never mutate the model, so a value can be
    shared freely across threads; :func:`train` works on a deep copy.
    """

    config: FlowConfig
    net: _FlowNet = field(repr=False, compare=False)

    @property
    def param_count(self) -> int:
        return sum(p.numel() for p in self.net.parameters())

    def named_arrays(self) -> dict[str, np.ndarray]:
        """Parameters as named numpy arrays (checkpoint payload order)."""
        return {name: p.detach().numpy().copy() for name, p in self.net.state_dict().items()}


def new_model(config: FlowConfig) -> FlowModel:
    """Build an identity-initialized model, deterministically from config.seed.

    Coupling output layers start at zero (so every layer is the identity and
    the total log-determinant is zero); hidden-layer weights are drawn from
    the seeded generator, scaled by 1/sqrt(fan_in); biases start at zero.
    """
    net = _FlowNet(config)
    gen = torch.Generator().manual_seed(config.seed)
    with torch.no_grad():
        for module in list(net.bond_layers) + list(net.atom_layers):
            fan_in = module.w1.weight.shape[1]
            w = torch.randn(module.w1.weight.shape, generator=gen, dtype=_DTYPE)
            module.w1.weight.copy_(w / math.sqrt(fan_in))
            module.w1.bias.zero_()
            module.w2.weight.zero_()
            module.w2.bias.zero_()
    return FlowModel(config, net)


# ---------------------------------------------------------------------------
# Core transforms (batched, on raw arrays)
# ---------------------------------------------------------------------------


def _check_finite(t: torch.Tensor, stage: str, layer: int) -> None:
    if not bool(torch.isfinite(t).all()):
        raise FlowNumericsError(f"non-finite value after {stage} layer {layer}")


def _forward_batch(
    model: FlowModel,
    atom: torch.Tensor,
    bond_flat: torch.Tensor,
    adjacency: torch.Tensor,
    check: bool = True,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Run dequantized blocks through the flow. Returns (z_atom, z_bond, logdet)."""
    logdet = torch.zeros(atom.shape[0], dtype=_DTYPE)
    x = bond_flat
    for i, layer in enumerate(model.net.bond_layers):
        x, ld = layer(x)
        if check:
            _check_finite(x, "bond", i)
        logdet = logdet + ld
    a = atom
    for i, layer in enumerate(model.net.atom_layers):
        a, ld = layer(a, adjacency)
        if check:
            _check_finite(a, "atom", i)
        logdet = logdet + ld
    return a, x, logdet


def _adjacency_from_bond(bond: torch.Tensor, c: int) -> torch.Tensor:
    # relation channels are everything except the trailing no-bond channel
    return bond[:, : c - 1]


def _dequant_noise(
    shape: tuple[int, ...], gamma: float, deterministic: bool, noise_seed: int
) -> torch.Tensor:
    if deterministic:
        return torch.full(shape, gamma / 2.0, dtype=_DTYPE)
    gen = torch.Generator().manual_seed(noise_seed)
    return torch.rand(shape, generator=gen, dtype=_DTYPE) * gamma


def encode_arrays(
    model: FlowModel,
    atom: np.ndarray,
    bond: np.ndarray,
    deterministic: bool = True,
    noise_seed: int = 0,
) -> tuple[LatentPoint, float]:
    """Encode raw tensors of GraphTensors shape (no one-hot validation).

    The atom couplings are conditioned on the original, pre-dequantization
    bond tensor's relation channels.
    """
    cfg = model.config
    atom_t = torch.as_tensor(np.asarray(atom, dtype=np.float64)).reshape(1, cfg.n_max, cfg.k)
    bond_t = torch.as_tensor(np.asarray(bond, dtype=np.float64)).reshape(
        1, cfg.c, cfg.n_max, cfg.n_max
    )
    adjacency = _adjacency_from_bond(bond_t, cfg.c)
    noise = _dequant_noise((1, cfg.latent_dim), cfg.dequant_gamma, deterministic, noise_seed)
    u_atom = noise[:, : cfg.atom_dim].reshape(1, cfg.n_max, cfg.k)
    u_bond = noise[:, cfg.atom_dim :]
    with torch.no_grad():
        z_atom, z_bond, logdet = _forward_batch(
            model, atom_t + u_atom, bond_t.reshape(1, -1) + u_bond, adjacency
        )
    z = torch.cat([z_atom.reshape(1, -1), z_bond], dim=-1)[0].numpy()
    return LatentPoint(z), float(logdet[0])


def encode(
    model: FlowModel,
    tensors: GraphTensors,
    deterministic: bool = True,
    noise_seed: int = 0,
) -> tuple[LatentPoint, float]:
    """Dequantize and encode one-hot graph tensors into a latent point."""
    return encode_arrays(model, tensors.atom, tensors.bond, deterministic, noise_seed)


def decode_batch(model: FlowModel, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert the flow for a (batch, D) array of latent vectors.

    Bond blocks are inverted first; each sample's bond block is discretized
    with the decoder's bond rule and the atom blocks are inverted conditioned
    on that adjacency. Returns continuous (batch, n, k) and (batch, c, n, n)
    arrays; discretization of the result is the graph decoder's job.
    """
    cfg = model.config
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != cfg.latent_dim:
        raise ValueError(f"latent batch must have shape (B, {cfg.latent_dim}), got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("latent vector contains non-finite entries")
    zt = torch.as_tensor(z.copy())
    z_atom = zt[:, : cfg.atom_dim].reshape(-1, cfg.n_max, cfg.k)
    z_bond = zt[:, cfg.atom_dim :]
    with torch.no_grad():
        x = z_bond
        for i, layer in reversed(list(enumerate(model.net.bond_layers))):
            x = layer.inverse(x)
            _check_finite(x, "bond-inverse", i)
        bond = x.reshape(-1, cfg.c, cfg.n_max, cfg.n_max)
        one_hot = np.stack(
            [discretize_bond_channels(sample) for sample in bond.numpy()]
        )
        adjacency = _adjacency_from_bond(torch.as_tensor(one_hot), cfg.c)
        a = z_atom
        for i, layer in reversed(list(enumerate(model.net.atom_layers))):
            a = layer.inverse(a, adjacency)
            _check_finite(a, "atom-inverse", i)
    return a.numpy(), bond.numpy()


def decode(model: FlowModel, z: LatentPoint | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert the flow for one latent point. Returns continuous (atom, bond)."""
    vec = z.z if isinstance(z, LatentPoint) else np.asarray(z, dtype=np.float64)
    atom, bond = decode_batch(model, vec[None, :])
    return atom[0], bond[0]


# ---------------------------------------------------------------------------
# Likelihood and training
# ---------------------------------------------------------------------------

_LOG_2PI = math.log(2.0 * math.pi)


def _standard_normal_logpdf(z: torch.Tensor) -> torch.Tensor:
    return -0.5 * (z * z).sum(dim=-1) - 0.5 * z.shape[-1] * _LOG_2PI


def log_likelihood(
    model: FlowModel,
    tensors: GraphTensors,
    deterministic: bool = True,
    noise_seed: int = 0,
) -> float:
    """log N(z; 0, I) + log|det J| for the encoded, dequantized input."""
    z, logdet = encode(model, tensors, deterministic, noise_seed)
    zt = torch.as_tensor(z.z.copy())
    return float(_standard_normal_logpdf(zt)) + logdet


def bits_per_dim(ll: float, dim: int) -> float:
    return -ll / (dim * math.log(2.0))


def _stack_dataset(dataset: Sequence[GraphTensors], cfg: FlowConfig) -> tuple[torch.Tensor, torch.Tensor]:
    atom = torch.as_tensor(np.stack([t.atom for t in dataset]).astype(np.float64))
    bond = torch.as_tensor(np.stack([t.bond for t in dataset]).astype(np.float64))
    if atom.shape[1:] != (cfg.n_max, cfg.k) or bond.shape[1:] != (cfg.c, cfg.n_max, cfg.n_max):
        raise ValueError("dataset tensor shapes do not match the model config")
    return atom, bond


def batch_log_likelihood(
    model: FlowModel, atom: torch.Tensor, bond: torch.Tensor, noise: torch.Tensor
) -> torch.Tensor:
    """Differentiable per-sample log-likelihood for training-sized batches."""
    cfg = model.config
    adjacency = _adjacency_from_bond(bond, cfg.c)
    u_atom = noise[:, : cfg.atom_dim].reshape(-1, cfg.n_max, cfg.k)
    u_bond = noise[:, cfg.atom_dim :]
    z_atom, z_bond, logdet = _forward_batch(
        model, atom + u_atom, bond.reshape(bond.shape[0], -1) + u_bond, adjacency, check=False
    )
    z = torch.cat([z_atom.reshape(z_atom.shape[0], -1), z_bond], dim=-1)
    return _standard_normal_logpdf(z) + logdet


def train(
    model: FlowModel,
    dataset: Sequence[GraphTensors],
    epochs: int,
    lr: float = 1e-3,
    batch: int = 32,
    seed: int = 0,
) -> tuple[FlowModel, list[TrainReport]]:
    """Train a copy of the model by maximum likelihood; the input is untouched.

    Uses adaptive-moment updates (decay 0.9 / 0.999, epsilon 1e-8), fresh
    uniform dequantization noise per batch, and a seeded generator for both
    shuffling and noise, so runs are reproducible parameter-for-parameter.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    if epochs < 0 or lr <= 0 or batch < 1:
        raise ValueError("epochs must be >= 0, lr > 0, batch >= 1")
    cfg = model.config
    trained = FlowModel(cfg, copy.deepcopy(model.net))
    reports: list[TrainReport] = []
    if epochs == 0:
        return trained, reports

    atom_all, bond_all = _stack_dataset(dataset, cfg)
    n = atom_all.shape[0]
    gen = torch.Generator().manual_seed(seed)
    opt = torch.optim.Adam(trained.net.parameters(), lr=lr, betas=(0.9, 0.999), eps=1e-8)

    for epoch in range(epochs):
        perm = torch.randperm(n, generator=gen)
        epoch_nll = 0.0
        epoch_grad = 0.0
        n_batches = 0
        for start in range(0, n, batch):
            idx = perm[start : start + batch]
            noise = (
                torch.rand((idx.shape[0], cfg.latent_dim), generator=gen, dtype=_DTYPE)
                * cfg.dequant_gamma
            )
            ll = batch_log_likelihood(trained, atom_all[idx], bond_all[idx], noise)
            loss = -ll.mean()
            if not bool(torch.isfinite(loss)):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {n_batches}"
                )
            opt.zero_grad()
            loss.backward()
            grad_norm = math.sqrt(
                sum(float((p.grad * p.grad).sum()) for p in trained.net.parameters() if p.grad is not None)
            )
            opt.step()
            epoch_nll += float(loss.detach())
            epoch_grad += grad_norm
            n_batches += 1
        mean_nll = epoch_nll / n_batches
        reports.append(
            TrainReport(
                epoch=epoch,
                nll_bits_per_dim=mean_nll / (cfg.latent_dim * math.log(2.0)),
                grad_norm=epoch_grad / n_batches,
            )
        )
    return trained, reports


def sample_latents(
    model: FlowModel, count: int, temperature: float = 1.0, seed: int = 0
) -> list[LatentPoint]:
    """Draw latent points from N(0, temperature^2 I), deterministically."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    gen = torch.Generator().manual_seed(seed)
    draws = torch.randn((count, model.config.latent_dim), generator=gen, dtype=_DTYPE)
    return [LatentPoint((temperature * row).numpy()) for row in draws]
