from .api import Service, create_app, create_app_from_env

__all__ = ["Service", "create_app", "create_app_from_env"]
