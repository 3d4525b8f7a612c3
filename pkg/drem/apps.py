from django.apps import AppConfig


class DremConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'drem'
    verbose_name = 'Dynamic regressor extension and mixing'
