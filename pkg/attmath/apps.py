from django.apps import AppConfig


class AttmathConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'attmath'
    verbose_name = 'Attitude math'
