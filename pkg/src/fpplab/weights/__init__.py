"""Weight-field generators for i.i.d., Ising, high-noise MRF and sign-change models."""
from .fields import SpinField, ValidationError, WeightField, read_grid, write_grid
from .ising import (CoalescenceError, cftp_ising, cftp_ising_many, cover_neighbor_table,
                    gibbs_ising, ising_conditional, sign_change_weights, spins_to_ab)
from .models import (KINDS, ModelSpec, ProbeResult, ProbeUnavailable, determination_probe,
                     gen_iid, generate_field, probe_curve)
from .mrf import (LocalKernel, copy_neighbor_kernel, hn_gamma, hn_threshold, iid_kernel,
                  ising_kernel, mrf_gibbs)
