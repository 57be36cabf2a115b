"""Reaction networks bundled with obsgreedy.

These are kept as plain tables so that a modified copy of this module can
be used to build variants. Rate constants are fixed isothermal values; they
are stand-ins chosen for desk-scale experiments, not fitted mechanism data.
"""

from __future__ import absolute_import

import numpy as np

from obsgreedy.kinetics import ReactionNetwork

# Six-species hydrogen/oxygen toy mechanism. Every species is a candidate
# sensor node (C = I). H and O atom counts are conserved.
DESK6_SPECIES = ["H2", "O2", "H", "O", "OH", "H2O"]

DESK6 = ReactionNetwork(
	#  H2 O2  H  O OH H2O
	q=[
	  [1, 0, 0, 0, 0, 0],     # H2 <=> 2H
	  [0, 1, 0, 0, 0, 0],     # O2 <=> 2O
	  [0, 0, 1, 1, 0, 0],     # H + O <=> OH
	  [1, 0, 0, 1, 0, 0],     # H2 + O <=> OH + H
	  [1, 0, 0, 0, 1, 0],     # OH + H2 <=> H2O + H
	  [0, 0, 1, 0, 1, 0],     # H + OH <=> H2O
	],
	w=[
	  [0, 0, 2, 0, 0, 0],
	  [0, 0, 0, 2, 0, 0],
	  [0, 0, 0, 0, 1, 0],
	  [0, 0, 1, 0, 1, 0],
	  [0, 0, 1, 0, 0, 1],
	  [0, 0, 0, 0, 0, 1],
	],
	v=[10.0, 8.0, 20.0, 15.0, 12.0, 25.0],
	b=[2.0, 3.0, 1.0, 4.0, 1.0, 0.5],
	species=DESK6_SPECIES,
	labels=[
		"H2 <=> 2H",
		"O2 <=> 2O",
		"H + O <=> OH",
		"H2 + O <=> OH + H",
		"OH + H2 <=> H2O + H",
		"H + OH <=> H2O",
	],
)

# Reference ("true") initial state for desk-scale experiments.
DESK6_X_TRUE = np.array([1.0, 0.6, 0.1, 0.2, 0.1, 0.3])

# Nine-species surrogate of a hydrogen/oxygen combustion mechanism. The
# species order matches the reference initial state below; argon is inert
# and only observable through its own sensor.
H2O2_SPECIES = ["H2", "H", "O", "O2", "OH", "H2O", "HO2", "H2O2", "AR"]

H2O2_SURROGATE = ReactionNetwork(
	#  H2  H  O O2 OH H2O HO2 H2O2 AR
	q=[
	  [1, 0, 1, 0, 0, 0, 0, 0, 0],    # O + H2 <=> H + OH
	  [0, 1, 0, 1, 0, 0, 0, 0, 0],    # H + O2 <=> O + OH
	  [1, 0, 0, 0, 1, 0, 0, 0, 0],    # OH + H2 <=> H + H2O
	  [0, 0, 0, 0, 2, 0, 0, 0, 0],    # 2OH <=> O + H2O
	  [1, 0, 0, 0, 0, 0, 0, 0, 0],    # H2 <=> 2H
	  [0, 0, 0, 1, 0, 0, 0, 0, 0],    # O2 <=> 2O
	  [0, 1, 0, 0, 1, 0, 0, 0, 0],    # H + OH <=> H2O
	  [0, 1, 0, 1, 0, 0, 0, 0, 0],    # H + O2 <=> HO2
	  [0, 1, 0, 0, 0, 0, 1, 0, 0],    # HO2 + H <=> 2OH
	  [0, 0, 0, 0, 0, 0, 2, 0, 0],    # 2HO2 <=> H2O2 + O2
	  [0, 0, 0, 0, 0, 0, 0, 1, 0],    # H2O2 <=> 2OH
	],
	w=[
	  [0, 1, 0, 0, 1, 0, 0, 0, 0],
	  [0, 0, 1, 0, 1, 0, 0, 0, 0],
	  [0, 1, 0, 0, 0, 1, 0, 0, 0],
	  [0, 0, 1, 0, 0, 1, 0, 0, 0],
	  [0, 2, 0, 0, 0, 0, 0, 0, 0],
	  [0, 0, 2, 0, 0, 0, 0, 0, 0],
	  [0, 0, 0, 0, 0, 1, 0, 0, 0],
	  [0, 0, 0, 0, 0, 0, 1, 0, 0],
	  [0, 0, 0, 0, 2, 0, 0, 0, 0],
	  [0, 0, 0, 1, 0, 0, 0, 1, 0],
	  [0, 0, 0, 0, 2, 0, 0, 0, 0],
	],
	v=[3.2e3, 8.1e3, 2.6e3, 1.5e3, 4.0e2, 2.5e2,
	   6.0e3, 4.4e3, 7.2e3, 9.0e2, 3.0e2],
	b=[1.1e3, 2.3e3, 4.0e2, 6.0e2, 9.0e2, 7.0e2,
	   5.0e1, 3.0e2, 2.0e2, 1.2e2, 8.0e2],
	species=H2O2_SPECIES,
	labels=[
		"O + H2 <=> H + OH",
		"H + O2 <=> O + OH",
		"OH + H2 <=> H + H2O",
		"2OH <=> O + H2O",
		"H2 <=> 2H",
		"O2 <=> 2O",
		"H + OH <=> H2O",
		"H + O2 <=> HO2",
		"HO2 + H <=> 2OH",
		"2HO2 <=> H2O2 + O2",
		"H2O2 <=> 2OH",
	],
)

H2O2_X_TRUE = np.array([2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.2, 0.0])

BUNDLED = {
	"desk6": DESK6,
	"h2o2_surrogate": H2O2_SURROGATE,
}

REFERENCE_STATES = {
	"desk6": DESK6_X_TRUE,
	"h2o2_surrogate": H2O2_X_TRUE,
}
