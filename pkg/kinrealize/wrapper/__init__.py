from .kinrealize_api import KinRealizeAPI
