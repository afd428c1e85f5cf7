from hypothesis import settings

# numerical properties are slow per example; no wall-clock deadline
settings.register_profile("numeric", deadline=None, max_examples=40)
settings.load_profile("numeric")
