from django.apps import AppConfig


class BlochstateConfig(AppConfig):
    name = "blochstate"
