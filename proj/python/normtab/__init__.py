from normtab._normtab import *  # noqa: F401,F403
