#!/usr/bin/env python

from setuptools import setup

setup(
	name="obsgreedy",
	version="0.1",
	description="Observability-based sensor selection for nonlinear "
	            "networks",
	packages=["obsgreedy"],
	install_requires=[
		"numpy>=1.17",
		"scipy>=1.4",
		"joblib>=0.14",
	],
	entry_points={
		"console_scripts": ["obsgreedy=obsgreedy:main"],
	},
)
