"""Coherent-feedback quantum amplifier networks."""

from .components import (
    CavityParams,
    NdpaParams,
    butterworth_params,
    check_amplifier_realizable,
    check_commutation,
    check_passive_unitary,
    make_beam_splitter,
    make_butterworth_controller,
    make_cavity_reflection,
    make_cavity_transmission,
    make_ndpa,
    make_phase_shifter,
)
from .feedback import (
    close_loop,
    high_gain_convergence,
    ideal_closed_loop,
    nonreciprocal_close,
    nonreciprocal_ideal,
    open_loop_system,
)
from .gw import (
    GwParams,
    baseline_noise,
    build_full_system,
    controlled_noise,
    lqg_synthesize,
    loss_sweep,
    mizuno_integral,
    solve_care,
)
from .rational import Polynomial, Port, RationalFunction, TransferMatrix
from .stability import Verdict, nyquist, routh_hurwitz_quartic, stable_by_roots
from .statespace import (
    LoopCavityParams,
    StateSpaceModel,
    build_integrator_model,
    build_phase_filter,
    build_self_oscillator,
    simulate_mean,
    to_transfer_matrix,
)

__version__ = "0.1.0"
