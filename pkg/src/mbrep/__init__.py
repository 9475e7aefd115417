"""Multiplicative boundary representations of free and virtually free groups.

Submodules: ``words`` (reduced-word combinatorics and cylinders), ``system``
(matrix systems, normalization, decomposition), ``multrep`` (vectors, the
unitary action, matrix coefficients, boundary operators), ``subgroups``
(coset tables and Schreier data), ``induce`` (block induction and the
intertwiner), ``vfree`` (free products of finite cyclic groups),
``boundary_measure`` (spectral measures and the majorization check), and
``cli``.
"""

from . import _kernels
from .words import Alphabet, Cylinder, CylinderUnion, Word, cylinder_image, multiply, refine, sphere
from .system import (FormTuple, MatrixSystem, NormalizationResult, Subsystem,
                     compatibility_residual, decompose, find_invariant_subsystem,
                     normalize, radical_quotient, spherical_system, transfer_apply,
                     validate)
from .multrep import (CrossedElement, MultVector, RepSpace, act, apply_crossed,
                      coefficient, covariance_check, cylinder_op, deepen, inner,
                      precompose)
from .subgroups import (CosetTable, FiniteGroup, SchreierData,
                        coset_table_from_quotient, expand_from_subgroup,
                        rewrite_to_subgroup, schreier)
from .induce import (InducedLayout, InducedVector, induce_system,
                     induced_action, induced_boundary_op, induced_inner,
                     intertwiner_J)
from .vfree import FreeProduct, VFGroupDatum, induce_to_vf, psl2z_datum, vf_validate
from .boundary_measure import (CylinderMeasure, HerzResult, herz_check,
                               no_harish_chandra_demo, quasi_regular_coefficient,
                               spectral_measure, uniform_measure)

__version__ = "0.1.0"

kernel_backend = _kernels.backend_name
