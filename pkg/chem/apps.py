from django.apps import AppConfig


class ChemConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "chem"
