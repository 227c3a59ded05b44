from django.apps import AppConfig


class MotifsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "motifs"
