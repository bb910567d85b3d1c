"""Secure ISAC transmit beamforming designs with robust secrecy guarantees.

Library layout:

- linalg:    Hermitian eigen-tools, PSD square roots, complex-to-real embedding
- conic:     standard-form cone programs and a first-order operator-splitting solver
- encoding:  real parametrization of Hermitian variables, constraint row builders
- model:     array/channel/beampattern model, secrecy metrics, rank-one construction
- search:    gamma grid search shared by the pipelines, tuned settings presets
- worstcase: bounded-error (S-procedure LMI) design pipeline
- outage:    Gaussian-error (Bernstein-type inequality) design pipeline
- baseline:  two-stage separate information/sensing benchmark design
- sensing:   transmit/echo simulation and Capon angle estimation
- rng:       counter-based random streams for reproducible simulation
- scenario:  JSON scenario schema -> configs and design instances
- cli:       scenario-driven command line runner
"""

__version__ = "0.1.0"
