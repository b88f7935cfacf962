from django.db import models
from django.forms import ValidationError


class SimulationRun(models.Model):
    preset = models.CharField(max_length=200)
    strategy = models.CharField(max_length=200)
    # decimal text of a seed in [0, 2**64)
    seed = models.CharField(max_length=20, null=True, blank=True)
    output_dir = models.CharField(max_length=500)
    delta_r_db = models.FloatField()
    r_bar_db = models.FloatField()
    manifest = models.JSONField(default=dict)
    created = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created', '-id']

    def __str__(self):
        return f'{self.preset} [{self.strategy}]'

    def clean(self):
        super().clean()
        if not self.preset:
            raise ValidationError("A run needs the preset or scenario it executed")

    def save(self, *args, **kwargs):
        if self.delta_r_db < 0:
            raise ValidationError("Peak-to-peak variation can not be negative")
        super().save(*args, **kwargs)
