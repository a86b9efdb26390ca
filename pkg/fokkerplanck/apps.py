from django.apps import AppConfig


class FokkerplanckConfig(AppConfig):
    name = "fokkerplanck"
