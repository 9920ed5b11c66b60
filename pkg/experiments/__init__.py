"""Invoke tasks for running reductions and simulations."""
from experiments import reduce, sim

from invoke import Collection

ns = Collection("x")
for module in (reduce, sim):
    ns.add_collection(Collection.from_module(module))
