from django.apps import AppConfig


class ErrstateConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'errstate'
    verbose_name = 'Tracking error and barrier function'
