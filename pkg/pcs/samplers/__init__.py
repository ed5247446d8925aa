# flake8: noqa
from .anneal import *
from .langevin_sampler import *
from .map_sampler import *
