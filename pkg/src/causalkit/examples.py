"""Canonical example systems used by the test-suite, the corpus, and the CLI docs.

All finite models are binary unless noted; noise weights are exact
rationals.  The Gaussian builders return the standing abstraction pair and
the three-space composition counterexample.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .causal import FiniteCausalSpace, independent_pinning_space
from .gaussian import LinearGaussianSCM
from .scm import FiniteSCM
from .spaces import CoordinateSpace, FiniteMeasure

F = Fraction

FAIR = (F(1, 2), F(1, 2))
BIASED = (F(3, 4), F(1, 4))  # value 1 with probability 1/4


def xor_scm() -> FiniteSCM:
    """X fair, Y = X xor N_Y with N_Y hitting 1 a quarter of the time."""
    return FiniteSCM.build(
        variables=[("X", 2), ("Y", 2)],
        parents={"X": (), "Y": ("X",)},
        noises={"X": FAIR, "Y": BIASED},
        mechanisms={
            "X": (0, 1),
            # index = parent X * 2 + noise
            "Y": (0, 1, 1, 0),
        },
    )


def parity_scm() -> FiniteSCM:
    """X and Z fair and independent, Y = X xor Z exactly."""
    return FiniteSCM.build(
        variables=[("X", 2), ("Z", 2), ("Y", 2)],
        parents={"X": (), "Z": (), "Y": ("X", "Z")},
        noises={"X": FAIR, "Z": FAIR, "Y": (F(1),)},
        mechanisms={
            "X": (0, 1),
            "Z": (0, 1),
            "Y": (0, 1, 1, 0),
        },
    )


def fork_scm() -> FiniteSCM:
    """Common cause X with two noisy readouts Y1, Y2."""
    return FiniteSCM.build(
        variables=[("X", 2), ("Y1", 2), ("Y2", 2)],
        parents={"X": (), "Y1": ("X",), "Y2": ("X",)},
        noises={"X": FAIR, "Y1": BIASED, "Y2": BIASED},
        mechanisms={
            "X": (0, 1),
            "Y1": (0, 1, 1, 0),
            "Y2": (0, 1, 1, 0),
        },
    )


def collider_scm() -> FiniteSCM:
    """Independent X1, X2 with Y = X1 xor X2."""
    return FiniteSCM.build(
        variables=[("X1", 2), ("X2", 2), ("Y", 2)],
        parents={"X1": (), "X2": (), "Y": ("X1", "X2")},
        noises={"X1": FAIR, "X2": FAIR, "Y": (F(1),)},
        mechanisms={
            "X1": (0, 1),
            "X2": (0, 1),
            "Y": (0, 1, 1, 0),
        },
    )


def mediator_confounder_scm() -> FiniteSCM:
    """Chain X -> M -> Y with a confounder H of X and Y."""
    return FiniteSCM.build(
        variables=[("H", 2), ("X", 2), ("M", 2), ("Y", 2)],
        parents={"H": (), "X": ("H",), "M": ("X",), "Y": ("M", "H")},
        noises={"H": FAIR, "X": BIASED, "M": BIASED, "Y": BIASED},
        mechanisms={
            "H": (0, 1),
            "X": (0, 1, 1, 0),
            "M": (0, 1, 1, 0),
            # Y = M xor H xor N_Y; index = (M * 2 + H) * 2 + noise
            "Y": (0, 1, 1, 0, 1, 0, 0, 1),
        },
    )


def composition_scm() -> FiniteSCM:
    """X1, X2 fair and independent, Y = X1 xor X2 xor N_Y."""
    return FiniteSCM.build(
        variables=[("X1", 2), ("X2", 2), ("Y", 2)],
        parents={"X1": (), "X2": (), "Y": ("X1", "X2")},
        noises={"X1": FAIR, "X2": FAIR, "Y": BIASED},
        mechanisms={
            "X1": (0, 1),
            "X2": (0, 1),
            # index = (X1 * 2 + X2) * 2 + noise
            "Y": (0, 1, 1, 0, 1, 0, 0, 1),
        },
    )


def faithfulness_full_scm() -> FiniteSCM:
    """Latent W drives X and, through M, cancels X's direct push on Y.

    Y = M xor X xor N_Y with M = W xor N_M and X = W, so observationally
    Y = N_M xor N_Y is independent of X, yet pinning X moves Y's law.
    """
    return FiniteSCM.build(
        variables=[("W", 2), ("X", 2), ("M", 2), ("Y", 2)],
        parents={"W": (), "X": ("W",), "M": ("W",), "Y": ("M", "X")},
        noises={"W": BIASED, "X": (F(1),), "M": BIASED, "Y": BIASED},
        mechanisms={
            "W": (0, 1),
            "X": (0, 1),
            "M": (0, 1, 1, 0),
            # index = (M * 2 + X) * 2 + noise
            "Y": (0, 1, 1, 0, 1, 0, 0, 1),
        },
    )


def faithfulness_independent_space() -> FiniteCausalSpace:
    """The (X, Y) reading with no mechanism: kernels pin and draw from P.

    Shares the observational (X, Y) law of the full faithfulness model;
    every intervention is inert, K_X(x, .) being the X-pin tensored with
    the Y-marginal.
    """
    space = CoordinateSpace.make([("X", 2), ("Y", 2)])
    # marginal of the full model: X = W ~ 1/4, Y = N_M xor N_Y ~ 3/8,
    # independent of each other
    px1, py1 = F(1, 4), F(3, 8)
    weights = [
        (1 - px1) * (1 - py1),
        (1 - px1) * py1,
        px1 * (1 - py1),
        px1 * py1,
    ]
    return independent_pinning_space(FiniteMeasure(space, tuple(weights)))


def coin_space() -> FiniteCausalSpace:
    """Single fair coin as a causal space."""
    space = CoordinateSpace.make([("C", 2)])
    return independent_pinning_space(FiniteMeasure.uniform(space))


def abstraction_gaussian_pair() -> tuple[LinearGaussianSCM, LinearGaussianSCM, np.ndarray, dict]:
    """Four-variable system, its two-variable abstraction, the map, and rho.

    Source: X1, X2 standard, Y1 = 3 X1 + X2 + U1, Y2 = X2 + U2.  Target:
    X ~ N(0, 2) and Y = 3 X + U with U ~ N(0, 5).  The map adds the X's
    and takes Y1 + 2 Y2; both coordinate pairs collapse.
    """
    source = LinearGaussianSCM(
        coords=("X1", "X2", "Y1", "Y2"),
        coefficients=np.array([
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [3.0, 1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ]),
        noise_variances=np.array([1.0, 1.0, 1.0, 1.0]),
    )
    target = LinearGaussianSCM(
        coords=("X", "Y"),
        coefficients=np.array([[0.0, 0.0], [3.0, 0.0]]),
        noise_variances=np.array([2.0, 5.0]),
    )
    matrix = np.array([
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 2.0],
    ])
    rho = {"X1": "X", "X2": "X", "Y1": "Y", "Y2": "Y"}
    return source, target, matrix, rho


def composition_gaussian_spaces() -> tuple[LinearGaussianSCM, LinearGaussianSCM, LinearGaussianSCM]:
    """The three systems of the composition counterexample.

    Full system: X1, X2 standard, Y = X1 + X2 + N_Y.  First space is the
    (X1, Y) subsystem, third is the (X1 + X2, Y) abstraction.
    """
    sub = LinearGaussianSCM(
        coords=("X1", "Y"),
        coefficients=np.array([[0.0, 0.0], [1.0, 0.0]]),
        noise_variances=np.array([1.0, 2.0]),
    )
    full = LinearGaussianSCM(
        coords=("X1", "X2", "Y"),
        coefficients=np.array([
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
        ]),
        noise_variances=np.array([1.0, 1.0, 1.0]),
    )
    abstracted = LinearGaussianSCM(
        coords=("X", "Y"),
        coefficients=np.array([[0.0, 0.0], [1.0, 0.0]]),
        noise_variances=np.array([2.0, 1.0]),
    )
    return sub, full, abstracted
