"""Full distributions of many-body spin observables from probe-qubit coherence.

Library layout:

* :mod:`kinkprobe.spin_model`  -- configurations, Hamiltonians, enumeration oracle
* :mod:`kinkprobe.partition`   -- transfer-matrix / sector-sum partition functions
* :mod:`kinkprobe.charfunc`    -- characteristic functions and cumulants
* :mod:`kinkprobe.reconstruct` -- Fourier inversion, gate-error correction
* :mod:`kinkprobe.probe`       -- protocol emulator (Gibbs sampling, shots, errors)
* :mod:`kinkprobe.quantum`     -- state-vector variant and product-formula probe
* :mod:`kinkprobe.cli`         -- command-line frontend and figure presets
"""

from .charfunc import (CharFunctionSamples, CumulantFlavor, CumulantSet,
                       Provenance, charfunc, charfunc_values, closed_cumulants,
                       cumulant_context, deform_params, exact_kink_mean,
                       joint_counts, numerical_cumulants, sample_charfunc)
from .distribution import (Distribution, DistributionReport, DistMeta,
                           charfunc_of_distribution, total_variation,
                           validate_distribution)
from .errors import (DeformationError, EstimationError, GridMismatchError,
                     InputError, KinkprobeError, SizeError)
from .partition import (ComplexParams, ScaledComplex, TransferSpectrum,
                        loschmidt_amplitude, partition_longrange, partition_nn,
                        transfer_spectrum)
from .probe import (GateErrorModel, ProbeRecord, circuit_phase, default_time_grid,
                    gate_count, gibbs_sample, gibbs_sampler, simulate_probe_exact,
                    simulate_probe_shots)
from .quantum import (DiagonalEnsemble, PauliObservable, QuantumRegister,
                      noncommuting_test_observable, quantum_probe,
                      thermal_diagonal_ensemble, trotter_error_probe)
from .reconstruct import (build_theta_grid, estimate_gate_error, gaussian_approx,
                          invert_dft, invert_with_gate_error)
from .spin_model import (ModelKind, ModelParams, ObsKind, ObservableSpec,
                         OracleResult, SpinConfig, custom_observable, energy,
                         enumerate_oracle, kink_number, magnetization,
                         observable_value)

__version__ = "0.1.0"
