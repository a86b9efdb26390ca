from django.apps import AppConfig


class BayesConfig(AppConfig):
    name = "bayes"
