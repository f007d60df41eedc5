from chp_power.core.config.settings import settings

__all__ = ["settings"]
