# Unit conversions. Everything internal is Hartree atomic units; eV, fs and
# W/cm^2 appear only at API boundaries.

HARTREE_EV = 27.211386245988
AU_TIME_FS = 2.4188843265857e-2
# Atomic unit of intensity, W/cm^2 (field amplitude 1 a.u.)
ATOMIC_INTENSITY_W_CM2 = 3.50944758e16


def ev_to_au(energy_ev: float) -> float:
    return energy_ev / HARTREE_EV


def au_to_ev(energy_au: float) -> float:
    return energy_au * HARTREE_EV


def fs_to_au(time_fs: float) -> float:
    return time_fs / AU_TIME_FS


def au_to_fs(time_au: float) -> float:
    return time_au * AU_TIME_FS
