from .maps import MapTable, PartialMap
from .net import Net
from .point import HPoint, SpaceConfig, TangentVec
from .result import ExtensionResult, Patch, TwoCenterReport
from .solution import BoundsReport, HullCertificate, ObtuseChoice, OnePointSolution
