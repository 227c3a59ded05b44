from django.apps import AppConfig


class MoldataConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "moldata"
