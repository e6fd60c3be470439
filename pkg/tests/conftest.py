from hypothesis import settings

# group chains are built lazily on first use, so early examples run long
settings.register_profile("default", deadline=None)
settings.load_profile("default")
