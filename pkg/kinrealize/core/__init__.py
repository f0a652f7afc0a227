from .config.kr_code import KinRealizeCode, ErrorCodeMap
from .config.kr_config import KRCONF
