# flake8: noqa
import sys

# basicsr 1.4 imports torchvision.transforms.functional_tensor, which torchvision 0.17 removed
try:
    import torchvision.transforms.functional_tensor
except ImportError:
    import torchvision.transforms.functional as _functional
    sys.modules['torchvision.transforms.functional_tensor'] = _functional

from .bounds import *
from .cover import *
from .errors import *
from .measurement import *
from .numeric import *
from .posterior import *
from .priors import *
from .samplers import *
from .transport import *
from .version import *
